#include "tilegan/sampler.hpp"

#include <sstream>
#include <stdexcept>

namespace tilegan {

std::int64_t count_subsamples(int x_full, int y_full, int x_batch, int y_batch) {
  if (x_batch > x_full || y_batch > y_full)
    throw std::invalid_argument("count_subsamples: batch dims exceed image dims");
  if (x_batch < 1 || y_batch < 1)
    throw std::invalid_argument("count_subsamples: batch dims must be >= 1");
  return static_cast<std::int64_t>(x_full - x_batch) * (y_full - y_batch);
}

namespace {

void check_config_for_image(const ImageBuffer& img, const SamplerConfig& cfg) {
  if (cfg.x_batch < 1 || cfg.y_batch < 1 || cfg.batch_size < 1)
    throw std::invalid_argument("sampler: batch dims and size must be >= 1");
  if (cfg.x_batch > img.width || cfg.y_batch > img.height)
    throw std::invalid_argument("sampler: batch resolution exceeds image " +
                                std::to_string(img.width) + "x" + std::to_string(img.height));
}

// Effective zoom bounds for one axis; explicit config values win.
std::pair<int, int> zoom_bounds(int configured_min, int configured_max, int batch_dim,
                                int full_dim) {
  int lo = configured_min > 0 ? configured_min : batch_dim;
  int hi = configured_max > 0 ? configured_max : full_dim;
  if (lo < batch_dim || hi > full_dim || lo > hi)
    throw std::invalid_argument("sampler: zoom range outside [batch, full]");
  return {lo, hi};
}

}  // namespace

CropSpec draw_crop(const ImageBuffer& img, const SamplerConfig& cfg, Rng& rng) {
  check_config_for_image(img, cfg);
  const auto [wlo, whi] = zoom_bounds(cfg.min_crop_w, cfg.max_crop_w, cfg.x_batch, img.width);
  const auto [hlo, hhi] = zoom_bounds(cfg.min_crop_h, cfg.max_crop_h, cfg.y_batch, img.height);

  CropSpec spec;
  spec.w = static_cast<int>(rng.uniform_in(wlo, whi));
  spec.h = static_cast<int>(rng.uniform_in(hlo, hhi));
  spec.x0 = static_cast<int>(rng.uniform_in(0, img.width - spec.w));
  spec.y0 = static_cast<int>(rng.uniform_in(0, img.height - spec.h));
  spec.flip_h = cfg.allow_flip_h && rng.coin();
  spec.flip_v = cfg.allow_flip_v && rng.coin();
  return spec;
}

Sampler::Sampler(SamplerConfig cfg, std::vector<ImageBuffer> images)
    : cfg_(cfg), images_(std::move(images)), rng_(cfg.seed) {
  if (images_.empty()) throw std::invalid_argument("sampler: empty domain image list");
  for (const ImageBuffer& img : images_) check_config_for_image(img, cfg_);
}

TrainingBatch Sampler::next_batch() {
  TrainingBatch batch;
  batch.tensor = Tensor4::zeros(Dims4{cfg_.batch_size, cfg_.y_batch, cfg_.x_batch, 3});
  batch.provenance.reserve(cfg_.batch_size);

  auto dst = batch.tensor.values();
  const std::size_t sample_floats =
      static_cast<std::size_t>(cfg_.y_batch) * cfg_.x_batch * 3;
  for (int i = 0; i < cfg_.batch_size; ++i) {
    const int image_id =
        images_.size() == 1 ? 0 : static_cast<int>(rng_.uniform(images_.size()));
    const ImageBuffer& img = images_[image_id];
    const CropSpec spec = draw_crop(img, cfg_, rng_);
    const ImageBuffer sample = crop_and_rescale(img, spec, cfg_.x_batch, cfg_.y_batch);
    to_tensor_into(sample, dst.subspan(static_cast<std::size_t>(i) * sample_floats,
                                       sample_floats));
    batch.provenance.push_back({image_id, spec});
  }
  return batch;
}

std::string format_crop_records(const std::vector<TrainingBatch::Provenance>& records) {
  std::ostringstream out;
  for (const auto& rec : records) {
    out << rec.image_id << ' ' << rec.crop.x0 << ' ' << rec.crop.y0 << ' ' << rec.crop.w
        << ' ' << rec.crop.h << ' ' << (rec.crop.flip_h ? 1 : 0) << ' '
        << (rec.crop.flip_v ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace tilegan
