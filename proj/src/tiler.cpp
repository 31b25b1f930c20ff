#include "tilegan/tiler.hpp"

#include <atomic>
#include <condition_variable>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tilegan {

namespace {

std::vector<int> stride_offsets(int full, int tile, int stride) {
  std::vector<int> offsets;
  for (int off = 0; off + tile <= full; off += stride) offsets.push_back(off);
  if (offsets.back() + tile < full) offsets.push_back(full - tile);
  return offsets;
}

}  // namespace

TileGrid plan_grid(int x_full, int y_full, int tile_w, int tile_h, int stride_x, int stride_y) {
  if (tile_w < 1 || tile_h < 1 || tile_w > x_full || tile_h > y_full)
    throw std::invalid_argument("plan_grid: tile dims must be in [1, image dims]");
  if (stride_x < 1 || stride_x > tile_w || stride_y < 1 || stride_y > tile_h)
    throw std::invalid_argument("plan_grid: stride must be in [1, tile dim]");

  TileGrid grid{tile_w, tile_h, stride_x, stride_y, {}};
  const std::vector<int> xs = stride_offsets(x_full, tile_w, stride_x);
  const std::vector<int> ys = stride_offsets(y_full, tile_h, stride_y);
  grid.tiles.reserve(xs.size() * ys.size());
  for (int y0 : ys)
    for (int x0 : xs) grid.tiles.push_back({x0, y0, tile_w, tile_h, false, false});
  return grid;
}

std::string format_grid_records(const TileGrid& grid) {
  std::vector<TrainingBatch::Provenance> records;
  records.reserve(grid.tiles.size());
  for (const CropSpec& tile : grid.tiles) records.push_back({0, tile});
  return format_crop_records(records);
}

BlendAccumulator::BlendAccumulator(int width, int height)
    : width_(width),
      height_(height),
      sum_(static_cast<std::size_t>(width) * height * 3, 0.0f),
      weight_(static_cast<std::size_t>(width) * height, 0.0f) {
  if (width < 1 || height < 1)
    throw std::invalid_argument("BlendAccumulator: dims must be >= 1");
}

void BlendAccumulator::add_tile(const CropSpec& tile, const float* values) {
  if (tile.x0 < 0 || tile.y0 < 0 || tile.x0 + tile.w > width_ || tile.y0 + tile.h > height_)
    throw std::invalid_argument("BlendAccumulator: tile out of bounds");
  for (int y = 0; y < tile.h; ++y) {
    const std::size_t row = static_cast<std::size_t>(tile.y0 + y) * width_ + tile.x0;
    float* srow = sum_.data() + row * 3;
    float* wrow = weight_.data() + row;
    const float* vrow = values + static_cast<std::size_t>(y) * tile.w * 3;
    for (int x = 0; x < tile.w; ++x) {
      srow[x * 3 + 0] += vrow[x * 3 + 0];
      srow[x * 3 + 1] += vrow[x * 3 + 1];
      srow[x * 3 + 2] += vrow[x * 3 + 2];
      wrow[x] += 1.0f;
    }
  }
}

float BlendAccumulator::weight_at(int x, int y) const {
  return weight_[static_cast<std::size_t>(y) * width_ + x];
}

ImageBuffer BlendAccumulator::finalize() const {
  ImageBuffer out(width_, height_);
  for (std::size_t p = 0, n = weight_.size(); p < n; ++p) {
    const float w = weight_[p];
    if (w < 1.0f)
      throw std::logic_error("BlendAccumulator: uncovered pixel at index " + std::to_string(p));
    for (int c = 0; c < 3; ++c) out.pixels[p * 3 + c] = float_to_pixel(sum_[p * 3 + c] / w);
  }
  return out;
}

namespace {

void check_mode(const TileTranslator& translator, const TileGrid& grid,
                const TileScaleMode& mode) {
  if (mode.kind == TileScaleMode::Kind::native) {
    if (grid.tile_w % translator.dims_multiple != 0 ||
        grid.tile_h % translator.dims_multiple != 0)
      throw std::invalid_argument("translate_image: native-mode tile dims must be divisible by " +
                                  std::to_string(translator.dims_multiple));
  } else {
    if (mode.batch_w < 1 || mode.batch_h < 1)
      throw std::invalid_argument("translate_image: rescale mode needs a batch resolution");
    if (mode.batch_w % translator.dims_multiple != 0 ||
        mode.batch_h % translator.dims_multiple != 0)
      throw std::invalid_argument(
          "translate_image: rescale-mode batch dims must be divisible by " +
          std::to_string(translator.dims_multiple));
  }
}

// One tile through the translator, returned in normalized [-1,1] space at the
// tile's own extent (rescale mode resizes there and back).
std::vector<float> process_tile(const TileTranslator& translator, const ImageBuffer& img,
                                const CropSpec& tile, const TileScaleMode& mode) {
  ImageBuffer patch = mode.kind == TileScaleMode::Kind::native
                          ? crop(img, tile)
                          : crop_and_rescale(img, tile, mode.batch_w, mode.batch_h);
  Tensor4 out = translator.fn(to_tensor(patch));
  const Dims4 od = out.dims();
  if (od.b != 1 || od.c != 3 || od.h != patch.height || od.w != patch.width)
    throw std::runtime_error("translate_image: translator changed tile dims");
  if (mode.kind == TileScaleMode::Kind::native)
    return std::vector<float>(out.data().begin(), out.data().end());
  return resize_bilinear_f32(out.data().data(), od.w, od.h, 3, tile.w, tile.h);
}

}  // namespace

ImageBuffer translate_image(const TileTranslator& translator, const ImageBuffer& img,
                            const TileGrid& grid, const TileScaleMode& mode) {
  check_mode(translator, grid, mode);
  BlendAccumulator acc(img.width, img.height);
  for (const CropSpec& tile : grid.tiles)
    acc.add_tile(tile, process_tile(translator, img, tile, mode).data());
  return acc.finalize();
}

ImageBuffer translate_parallel(const TileTranslator& translator, const ImageBuffer& img,
                               const TileGrid& grid, const TileScaleMode& mode, int workers) {
  if (workers < 1) throw std::invalid_argument("translate_parallel: workers must be >= 1");
  check_mode(translator, grid, mode);

  const std::size_t n = grid.tiles.size();
  const std::size_t window = static_cast<std::size_t>(workers) * 2;
  BlendAccumulator acc(img.width, img.height);

  std::mutex mutex;
  std::condition_variable cv;
  std::map<std::size_t, std::vector<float>> done;
  std::atomic<std::size_t> next_tile{0};
  std::size_t merged = 0;
  std::exception_ptr failure;

  auto worker_loop = [&]() {
    NoGradGuard guard;
    for (;;) {
      const std::size_t i = next_tile.fetch_add(1);
      if (i >= n) break;
      {
        // Throttle so at most `window` results wait ahead of the reducer.
        std::unique_lock<std::mutex> lock(mutex);
        cv.wait(lock, [&] { return failure || i < merged + window; });
        if (failure) break;
      }
      std::vector<float> result;
      try {
        result = process_tile(translator, img, grid.tiles[i], mode);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (!failure) failure = std::current_exception();
        cv.notify_all();
        break;
      }
      std::lock_guard<std::mutex> lock(mutex);
      done.emplace(i, std::move(result));
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker_loop);

  {
    // Reduce in grid order regardless of completion order.
    std::unique_lock<std::mutex> lock(mutex);
    while (merged < n) {
      cv.wait(lock, [&] { return failure || done.count(merged) > 0; });
      if (failure) break;
      std::vector<float> values = std::move(done[merged]);
      done.erase(merged);
      lock.unlock();
      acc.add_tile(grid.tiles[merged], values.data());
      lock.lock();
      ++merged;
      cv.notify_all();
    }
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return acc.finalize();
}

ImageBuffer translate_full(const TileTranslator& translator, const ImageBuffer& img,
                           int tile_w, int tile_h, int stride_x, int stride_y,
                           const TileScaleMode& mode, int workers) {
  if (img.width < tile_w || img.height < tile_h) {
    // Single whole-image tile, forced through the common resolution.
    TileGrid grid{img.width, img.height, img.width, img.height,
                  {CropSpec{0, 0, img.width, img.height, false, false}}};
    TileScaleMode forced = mode;
    if (forced.kind == TileScaleMode::Kind::native) {
      forced = TileScaleMode::rescale_to(tile_w, tile_h);
    }
    return translate_parallel(translator, img, grid, forced, workers);
  }
  const TileGrid grid = plan_grid(img.width, img.height, tile_w, tile_h, stride_x, stride_y);
  return translate_parallel(translator, img, grid, mode, workers);
}

}  // namespace tilegan
