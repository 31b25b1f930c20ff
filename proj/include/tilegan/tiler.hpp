#pragma once

#include <string>
#include <vector>

#include "tilegan/gan.hpp"
#include "tilegan/image.hpp"
#include "tilegan/sampler.hpp"

namespace tilegan {

/// Inference tile schedule: regular stride offsets plus clamped final
/// row/column so the union of tiles covers every pixel at least once.
struct TileGrid {
  int tile_w = 0;
  int tile_h = 0;
  int stride_x = 0;
  int stride_y = 0;
  std::vector<CropSpec> tiles;  // row-major, deterministic merge order
};

TileGrid plan_grid(int x_full, int y_full, int tile_w, int tile_h, int stride_x, int stride_y);

/// Tiles exported in the sampler's crop-record text format (image id 0).
std::string format_grid_records(const TileGrid& grid);

/// Per-pixel weighted-sum merge state in normalized [-1,1] space. These
/// buffers scale with the full image and live outside the tracked tensor
/// scope, like the source bitmap.
class BlendAccumulator {
public:
  BlendAccumulator(int width, int height);

  /// values: tile_h x tile_w x 3 floats in [-1,1], row-major.
  void add_tile(const CropSpec& tile, const float* values);

  /// Exact number of tiles covering each pixel so far.
  float weight_at(int x, int y) const;

  /// Per-pixel average, denormalized to 8-bit. Every pixel must be covered.
  ImageBuffer finalize() const;

private:
  int width_;
  int height_;
  std::vector<float> sum_;     // w*h*3
  std::vector<float> weight_;  // w*h
};

struct TileScaleMode {
  enum class Kind { native, rescale } kind = Kind::native;
  // Common resolution tiles are downscaled to before translation (rescale
  // mode only); translated tiles are upscaled back before merging.
  int batch_w = 0;
  int batch_h = 0;

  static TileScaleMode native() { return {}; }
  static TileScaleMode rescale_to(int batch_w, int batch_h) {
    return {Kind::rescale, batch_w, batch_h};
  }
};

/// Sequential tiled translation: every tile goes through the translator
/// independently and results merge by per-pixel averaging.
ImageBuffer translate_image(const TileTranslator& translator, const ImageBuffer& img,
                            const TileGrid& grid, const TileScaleMode& mode);

/// Same computation fanned out over a worker pool. Per-tile results are
/// merged by a single reducer in grid order, so the output is byte-identical
/// to translate_image for any worker count.
ImageBuffer translate_parallel(const TileTranslator& translator, const ImageBuffer& img,
                               const TileGrid& grid, const TileScaleMode& mode, int workers);

/// End-to-end helper: plans a default grid (clamping tiles to the image) and
/// translates. An image smaller than the tile on either axis is processed as
/// a single rescale-mode tile at the tile resolution.
ImageBuffer translate_full(const TileTranslator& translator, const ImageBuffer& img,
                           int tile_w, int tile_h, int stride_x, int stride_y,
                           const TileScaleMode& mode, int workers);

}  // namespace tilegan
