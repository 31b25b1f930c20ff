#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "tilegan/image.hpp"

// Minimal PNG container: 8-bit gray/RGB/gray+alpha/RGBA, no interlace, no
// palette. Deflate is delegated to zlib; chunk layout, CRCs, and the five
// scanline filters are handled here.

namespace tilegan {

namespace {

constexpr std::uint8_t kSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                  const std::uint8_t* data, std::size_t len) {
  write_be32(out, static_cast<std::uint32_t>(len));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  if (len) out.insert(out.end(), data, data + len);
  std::uint32_t crc = crc32(0, out.data() + type_at, static_cast<uInt>(4 + len));
  write_be32(out, crc);
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

std::vector<std::uint8_t> inflate_all(const std::uint8_t* data, std::size_t len,
                                      std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) throw std::runtime_error("png: inflateInit failed");
  zs.next_in = const_cast<Bytef*>(data);
  zs.avail_in = static_cast<uInt>(len);
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.avail_out != 0)
    throw std::runtime_error("png: corrupt or truncated compressed stream");
  return out;
}

}  // namespace

ImageBuffer decode_png(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kSignature, 8) != 0)
    throw std::runtime_error("png: bad signature");

  std::size_t pos = 8;
  int width = 0, height = 0, bit_depth = 0, color_type = 0;
  bool have_ihdr = false;
  std::vector<std::uint8_t> idat;

  while (pos + 12 <= bytes.size()) {
    const std::uint32_t len = read_be32(&bytes[pos]);
    if (pos + 12 + len > bytes.size()) throw std::runtime_error("png: truncated chunk");
    const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
    const std::uint8_t* data = &bytes[pos + 8];
    const std::uint32_t stored_crc = read_be32(&bytes[pos + 8 + len]);
    const std::uint32_t actual_crc = crc32(0, &bytes[pos + 4], 4 + len);
    if (stored_crc != actual_crc) throw std::runtime_error("png: chunk CRC mismatch");

    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw std::runtime_error("png: bad IHDR");
      width = static_cast<int>(read_be32(data));
      height = static_cast<int>(read_be32(data + 4));
      bit_depth = data[8];
      color_type = data[9];
      if (data[10] != 0 || data[11] != 0) throw std::runtime_error("png: bad IHDR method");
      if (data[12] != 0) throw std::runtime_error("png: interlaced images unsupported");
      have_ihdr = true;
    } else if (std::memcmp(type, "PLTE", 4) == 0) {
      if (color_type == 3) throw std::runtime_error("png: paletted images unsupported");
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }

  if (!have_ihdr || width < 1 || height < 1) throw std::runtime_error("png: missing IHDR");
  if (bit_depth != 8)
    throw std::runtime_error("png: unsupported bit depth " + std::to_string(bit_depth));
  int spp = 0;
  switch (color_type) {
    case 0: spp = 1; break;  // gray
    case 2: spp = 3; break;  // rgb
    case 4: spp = 2; break;  // gray + alpha
    case 6: spp = 4; break;  // rgba
    default: throw std::runtime_error("png: unsupported color type " + std::to_string(color_type));
  }
  if (idat.empty()) throw std::runtime_error("png: missing IDAT");

  const std::size_t stride = static_cast<std::size_t>(width) * spp;
  std::vector<std::uint8_t> raw =
      inflate_all(idat.data(), idat.size(), (stride + 1) * height);

  // Undo per-row filters in place (prev points at the reconstructed row above).
  std::vector<std::uint8_t> recon(stride * height);
  for (int y = 0; y < height; ++y) {
    const std::uint8_t filter = raw[(stride + 1) * y];
    const std::uint8_t* src = &raw[(stride + 1) * y + 1];
    std::uint8_t* dst = &recon[stride * y];
    const std::uint8_t* prev = y > 0 ? &recon[stride * (y - 1)] : nullptr;
    switch (filter) {
      case 0:
        std::memcpy(dst, src, stride);
        break;
      case 1:
        for (std::size_t i = 0; i < stride; ++i)
          dst[i] = static_cast<std::uint8_t>(src[i] + (i >= std::size_t(spp) ? dst[i - spp] : 0));
        break;
      case 2:
        for (std::size_t i = 0; i < stride; ++i)
          dst[i] = static_cast<std::uint8_t>(src[i] + (prev ? prev[i] : 0));
        break;
      case 3:
        for (std::size_t i = 0; i < stride; ++i) {
          const int left = i >= std::size_t(spp) ? dst[i - spp] : 0;
          const int up = prev ? prev[i] : 0;
          dst[i] = static_cast<std::uint8_t>(src[i] + (left + up) / 2);
        }
        break;
      case 4:
        for (std::size_t i = 0; i < stride; ++i) {
          const int left = i >= std::size_t(spp) ? dst[i - spp] : 0;
          const int up = prev ? prev[i] : 0;
          const int ul = (prev && i >= std::size_t(spp)) ? prev[i - spp] : 0;
          dst[i] = static_cast<std::uint8_t>(src[i] + paeth(left, up, ul));
        }
        break;
      default:
        throw std::runtime_error("png: bad filter byte");
    }
  }

  ImageBuffer img(width, height);
  for (std::size_t p = 0, n = img.pixel_count(); p < n; ++p) {
    const std::uint8_t* s = &recon[p * spp];
    std::uint8_t* d = &img.pixels[p * 3];
    switch (color_type) {
      case 0: d[0] = d[1] = d[2] = s[0]; break;
      case 2: d[0] = s[0]; d[1] = s[1]; d[2] = s[2]; break;
      case 4: d[0] = d[1] = d[2] = s[0]; break;
      case 6: d[0] = s[0]; d[1] = s[1]; d[2] = s[2]; break;
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
  const std::size_t stride = static_cast<std::size_t>(img.width) * 3;
  std::vector<std::uint8_t> raw((stride + 1) * img.height);
  for (int y = 0; y < img.height; ++y) {
    raw[(stride + 1) * y] = 0;  // filter: None
    std::memcpy(&raw[(stride + 1) * y + 1], &img.pixels[stride * y], stride);
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) !=
      Z_OK)
    throw std::runtime_error("png: deflate failed");
  compressed.resize(bound);

  std::vector<std::uint8_t> out;
  out.insert(out.end(), kSignature, kSignature + 8);
  std::uint8_t ihdr[13];
  ihdr[0] = static_cast<std::uint8_t>(img.width >> 24);
  ihdr[1] = static_cast<std::uint8_t>(img.width >> 16);
  ihdr[2] = static_cast<std::uint8_t>(img.width >> 8);
  ihdr[3] = static_cast<std::uint8_t>(img.width);
  ihdr[4] = static_cast<std::uint8_t>(img.height >> 24);
  ihdr[5] = static_cast<std::uint8_t>(img.height >> 16);
  ihdr[6] = static_cast<std::uint8_t>(img.height >> 8);
  ihdr[7] = static_cast<std::uint8_t>(img.height);
  ihdr[8] = 8;   // bit depth
  ihdr[9] = 2;   // RGB
  ihdr[10] = 0;  // compression
  ihdr[11] = 0;  // filter method
  ihdr[12] = 0;  // no interlace
  append_chunk(out, "IHDR", ihdr, sizeof(ihdr));
  append_chunk(out, "IDAT", compressed.data(), compressed.size());
  append_chunk(out, "IEND", nullptr, 0);
  return out;
}

ImageBuffer load_png(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_png: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_png(bytes);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void save_png(const std::string& path, const ImageBuffer& img) {
  if (img.width < 1 || img.height < 1)
    throw std::invalid_argument("save_png: empty image");
  const std::vector<std::uint8_t> bytes = encode_png(img);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_png: cannot open " + tmp);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("save_png: short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("save_png: rename to " + path + " failed: " + ec.message());
}

}  // namespace tilegan
