#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tilegan/gan.hpp"
#include "tilegan/tensor.hpp"

namespace tilegan {

// Checkpoint container format. Layout: 4 magic bytes, u32 version (= 1),
// then per entry: u32 name length, UTF-8 name, 4 x u32 dims, raw
// little-endian 32-bit floats (dims product of them). Model files use the
// "TGCK" magic, optimizer/train-state files use "TGOP".

inline constexpr char kModelMagic[4] = {'T', 'G', 'C', 'K'};
inline constexpr char kOptimizerMagic[4] = {'T', 'G', 'O', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointEntry {
  std::string name;
  Dims4 dims;
  std::vector<float> data;
};

void write_entries(const std::string& path, const char magic[4],
                   const std::vector<CheckpointEntry>& entries);
std::vector<CheckpointEntry> read_entries(const std::string& path, const char magic[4]);

/// Model weights plus "meta.*" manifest entries describing the architecture,
/// so checkpoints are self-describing.
void save_model(const std::string& path, const GanModel& model);
GanModel load_model(const std::string& path);

/// Architecture recorded in a model checkpoint, without loading the weights.
GanArch peek_arch(const std::string& path);

// RNG streams are embedded in optimizer files as bit-cast float payloads;
// bytes round-trip exactly because nothing interprets them numerically.
std::vector<float> pack_rng_state(const std::array<std::uint64_t, 4>& state);
std::array<std::uint64_t, 4> unpack_rng_state(const std::vector<float>& data);

}  // namespace tilegan
