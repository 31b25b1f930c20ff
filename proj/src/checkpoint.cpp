#include "tilegan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace tilegan {

namespace {

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void write_entries(const std::string& path, const char magic[4],
                   const std::vector<CheckpointEntry>& entries) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + tmp);
    out.write(magic, 4);
    write_u32(out, kCheckpointVersion);
    for (const CheckpointEntry& e : entries) {
      if (e.data.size() != e.dims.count())
        throw std::logic_error("checkpoint: entry '" + e.name + "' data/dims mismatch");
      write_u32(out, static_cast<std::uint32_t>(e.name.size()));
      out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
      write_u32(out, static_cast<std::uint32_t>(e.dims.b));
      write_u32(out, static_cast<std::uint32_t>(e.dims.h));
      write_u32(out, static_cast<std::uint32_t>(e.dims.w));
      write_u32(out, static_cast<std::uint32_t>(e.dims.c));
      out.write(reinterpret_cast<const char*>(e.data.data()),
                static_cast<std::streamsize>(e.data.size() * sizeof(float)));
    }
    if (!out) throw std::runtime_error("checkpoint: short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw std::runtime_error("checkpoint: rename to " + path + " failed: " + ec.message());
}

std::vector<CheckpointEntry> read_entries(const std::string& path, const char magic[4]) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char got[4];
  in.read(got, 4);
  if (!in || std::memcmp(got, magic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  const std::uint32_t version = read_u32(in);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));

  std::vector<CheckpointEntry> entries;
  while (true) {
    std::uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), 4);
    if (in.eof()) break;
    if (!in) throw std::runtime_error("checkpoint: truncated file " + path);
    CheckpointEntry e;
    e.name.resize(name_len);
    in.read(e.name.data(), name_len);
    e.dims.b = static_cast<int>(read_u32(in));
    e.dims.h = static_cast<int>(read_u32(in));
    e.dims.w = static_cast<int>(read_u32(in));
    e.dims.c = static_cast<int>(read_u32(in));
    if (e.dims.b < 1 || e.dims.h < 1 || e.dims.w < 1 || e.dims.c < 1)
      throw std::runtime_error("checkpoint: bad dims for entry '" + e.name + "'");
    e.data.resize(e.dims.count());
    in.read(reinterpret_cast<char*>(e.data.data()),
            static_cast<std::streamsize>(e.data.size() * sizeof(float)));
    if (!in) throw std::runtime_error("checkpoint: truncated entry '" + e.name + "'");
    entries.push_back(std::move(e));
  }
  return entries;
}

namespace {

CheckpointEntry scalar_entry(const std::string& name, float v) {
  return {name, Dims4{1, 1, 1, 1}, {v}};
}

float find_scalar(const std::vector<CheckpointEntry>& entries, const std::string& name) {
  for (const CheckpointEntry& e : entries)
    if (e.name == name) {
      if (e.data.size() != 1)
        throw std::runtime_error("checkpoint: '" + name + "' is not scalar");
      return e.data[0];
    }
  throw std::runtime_error("checkpoint: missing entry '" + name + "'");
}

GanArch arch_from_entries(const std::vector<CheckpointEntry>& entries) {
  GanArch arch;
  arch.base_channels = static_cast<int>(find_scalar(entries, "meta.base_channels"));
  arch.private_blocks = static_cast<int>(find_scalar(entries, "meta.private_blocks"));
  arch.shared_blocks = static_cast<int>(find_scalar(entries, "meta.shared_blocks"));
  arch.leaky_alpha = find_scalar(entries, "meta.leaky_alpha");
  arch.norm_eps = find_scalar(entries, "meta.norm_eps");
  return arch;
}

}  // namespace

void save_model(const std::string& path, const GanModel& model) {
  std::vector<CheckpointEntry> entries;
  const GanArch& arch = model.arch();
  entries.push_back(scalar_entry("meta.base_channels", static_cast<float>(arch.base_channels)));
  entries.push_back(scalar_entry("meta.private_blocks", static_cast<float>(arch.private_blocks)));
  entries.push_back(scalar_entry("meta.shared_blocks", static_cast<float>(arch.shared_blocks)));
  entries.push_back(scalar_entry("meta.leaky_alpha", arch.leaky_alpha));
  entries.push_back(scalar_entry("meta.norm_eps", arch.norm_eps));
  for (const auto& [name, tensor] : model.all_params()) {
    CheckpointEntry e;
    e.name = name;
    e.dims = tensor.dims();
    e.data.assign(tensor.data().begin(), tensor.data().end());
    entries.push_back(std::move(e));
  }
  write_entries(path, kModelMagic, entries);
}

GanArch peek_arch(const std::string& path) {
  return arch_from_entries(read_entries(path, kModelMagic));
}

GanModel load_model(const std::string& path) {
  const std::vector<CheckpointEntry> entries = read_entries(path, kModelMagic);
  GanModel model(arch_from_entries(entries), 0);

  std::map<std::string, Tensor4> by_name;
  for (auto& [name, tensor] : model.all_params()) by_name.emplace(name, tensor);

  std::size_t loaded = 0;
  for (const CheckpointEntry& e : entries) {
    if (e.name.starts_with("meta.")) continue;
    auto it = by_name.find(e.name);
    if (it == by_name.end())
      throw std::runtime_error("checkpoint: unknown parameter '" + e.name + "'");
    Tensor4& t = it->second;
    if (!(t.dims() == e.dims))
      throw std::runtime_error("checkpoint: shape mismatch for '" + e.name + "'");
    std::copy(e.data.begin(), e.data.end(), t.values().begin());
    ++loaded;
  }
  if (loaded != by_name.size())
    throw std::runtime_error("checkpoint: " + path + " is missing " +
                             std::to_string(by_name.size() - loaded) + " parameter(s)");
  return model;
}

std::vector<float> pack_rng_state(const std::array<std::uint64_t, 4>& state) {
  std::vector<float> out(8);
  std::memcpy(out.data(), state.data(), 32);
  return out;
}

std::array<std::uint64_t, 4> unpack_rng_state(const std::vector<float>& data) {
  if (data.size() != 8) throw std::runtime_error("checkpoint: bad rng state size");
  std::array<std::uint64_t, 4> state;
  std::memcpy(state.data(), data.data(), 32);
  return state;
}

}  // namespace tilegan
