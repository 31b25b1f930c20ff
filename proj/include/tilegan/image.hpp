#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tilegan/tensor.hpp"

namespace tilegan {

/// Full-resolution 8-bit RGB image, row-major. Immutable by convention once
/// loaded; concurrent reads (crops) from many threads are safe.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  static constexpr int channels = 3;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  ImageBuffer() = default;
  ImageBuffer(int w, int h)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * channels, 0) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  void set(int x, int y, int c, std::uint8_t v) {
    pixels[(static_cast<std::size_t>(y) * width + x) * channels + c] = v;
  }
  bool operator==(const ImageBuffer&) const = default;
};

/// A rectangular subsample: offsets, extent, and post-extraction flips.
struct CropSpec {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;
  bool flip_h = false;
  bool flip_v = false;
  bool operator==(const CropSpec&) const = default;
};

/// Throws std::invalid_argument when the spec does not fit inside the image.
void validate_crop(const ImageBuffer& img, const CropSpec& spec);

ImageBuffer crop(const ImageBuffer& img, const CropSpec& spec);

/// Bilinear resize with half-pixel-center alignment. Constant images stay
/// constant; outputs never overshoot the source value range.
ImageBuffer rescale(const ImageBuffer& img, int target_w, int target_h);

/// crop + flips + rescale fused, sampling the source directly so no
/// intermediate crop buffer is materialized. Byte-identical to
/// rescale(crop(img, spec), tw, th).
ImageBuffer crop_and_rescale(const ImageBuffer& img, const CropSpec& spec, int target_w,
                             int target_h);

/// Bilinear resize of a raw float plane (h x w x c, row-major), same
/// half-pixel convention as rescale().
std::vector<float> resize_bilinear_f32(const float* src, int src_w, int src_h, int ch,
                                       int target_w, int target_h);

// Pixel space <-> network space: p -> p/127.5 - 1 in [-1,1]; the inverse
// clamps and rounds half away from zero. Round-trip is exact on all 256
// values.
Tensor4 to_tensor(const ImageBuffer& img);
void to_tensor_into(const ImageBuffer& img, std::span<float> dst);
ImageBuffer from_tensor(const Tensor4& t);
std::uint8_t float_to_pixel(float v);

// 8-bit RGB PNG I/O. Grayscale is promoted to 3 channels, alpha is dropped;
// 16-bit, paletted, and interlaced files are rejected. Writes go through a
// temp file + rename.
ImageBuffer load_png(const std::string& path);
void save_png(const std::string& path, const ImageBuffer& img);

ImageBuffer decode_png(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_png(const ImageBuffer& img);

}  // namespace tilegan
