#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tilegan/image.hpp"
#include "tilegan/rng.hpp"
#include "tilegan/tensor.hpp"

namespace tilegan {

/// Parameters of random subsample extraction for one domain.
struct SamplerConfig {
  int x_batch = 128;  // common resolution every crop is scaled down to
  int y_batch = 128;
  int batch_size = 1;
  bool allow_flip_h = true;
  bool allow_flip_v = true;
  std::uint64_t seed = 0;
  // Zoom range: crop side lengths are drawn uniformly per axis between the
  // batch resolution and the full image. Tests may pin the range explicitly;
  // 0 keeps the default behaviour.
  int min_crop_w = 0, max_crop_w = 0;
  int min_crop_h = 0, max_crop_h = 0;
};

/// One training batch: the stacked tensor plus, per sample, where it came from.
struct TrainingBatch {
  Tensor4 tensor;  // (b, y_batch, x_batch, 3), values in [-1, 1]
  struct Provenance {
    int image_id;
    CropSpec crop;
  };
  std::vector<Provenance> provenance;
};

/// Number of possible different subsamples: (x_full - x_batch)*(y_full - y_batch).
std::int64_t count_subsamples(int x_full, int y_full, int x_batch, int y_batch);

CropSpec draw_crop(const ImageBuffer& img, const SamplerConfig& cfg, Rng& rng);

/// Owns the RNG stream for one domain; instances are single-threaded.
class Sampler {
public:
  Sampler(SamplerConfig cfg, std::vector<ImageBuffer> images);

  TrainingBatch next_batch();

  const SamplerConfig& config() const { return cfg_; }
  const std::vector<ImageBuffer>& images() const { return images_; }
  Rng& rng() { return rng_; }
  const Rng& rng() const { return rng_; }

private:
  SamplerConfig cfg_;
  std::vector<ImageBuffer> images_;
  Rng rng_;
};

/// Audit format shared with the tiler's grid export:
/// "<image_id> <x0> <y0> <w> <h> <flip_h> <flip_v>" per line.
std::string format_crop_records(const std::vector<TrainingBatch::Provenance>& records);

}  // namespace tilegan
