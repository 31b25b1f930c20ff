#include "tilegan/profile.hpp"

#include <cmath>
#include <sstream>

#include "tilegan/rng.hpp"
#include "tilegan/tiler.hpp"

namespace tilegan {

ImageBuffer synthetic_noise_image(int width, int height, std::uint64_t seed) {
  ImageBuffer img(width, height);
  Rng rng(seed);
  for (std::uint8_t& p : img.pixels) p = static_cast<std::uint8_t>(rng.uniform(256));
  return img;
}

MemReport tracked_run(const GanModel& model, Workload workload, Dims4 input_dims) {
  MemReport report;
  report.input_pixels = static_cast<std::size_t>(input_dims.h) * input_dims.w;

  memprof::reset_peak();
  memprof::take_phase_samples();  // drop leftovers from a previous run
  memprof::begin_phase("input");
  {
    Tensor4 input = Tensor4::zeros(input_dims);
    auto vals = input.values();
    for (std::size_t i = 0; i < vals.size(); ++i)
      vals[i] = static_cast<float>((i % 255) ^ (i / 255 % 255)) / 127.5f - 1.0f;

    Tensor4 out = model.translate(Direction::AtoB, input);
    if (workload == Workload::forward_backward) {
      memprof::mark_phase("backward");
      backward(mean_all(out));
    }
    memprof::end_phase();
  }
  report.peak_bytes = memprof::peak_bytes();
  report.samples = memprof::take_phase_samples();
  return report;
}

namespace {

void fit_line(SweepReport& report) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (const SweepRow& row : report.rows) {
    if (row.aborted) continue;
    const double x = static_cast<double>(row.pixels);
    const double y = static_cast<double>(row.peak_bytes);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++n;
  }
  if (n < 2) return;
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return;
  report.slope = (n * sxy - sx * sy) / denom;
  report.intercept = (sy - report.slope * sx) / n;
  const double ss_tot = syy - sy * sy / n;
  double ss_res = 0;
  for (const SweepRow& row : report.rows) {
    if (row.aborted) continue;
    const double pred =
        report.slope * static_cast<double>(row.pixels) + report.intercept;
    const double r = static_cast<double>(row.peak_bytes) - pred;
    ss_res += r * r;
  }
  report.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  report.fit_valid = true;
}

}  // namespace

SweepReport memory_sweep(const GanModel& model, const std::vector<int>& sizes,
                         std::size_t hard_cap, std::size_t label_cap) {
  SweepReport report;
  report.label_cap = label_cap;
  const std::size_t previous_cap = memprof::alloc_cap();
  for (int side : sizes) {
    if (side < 8 || side % 8 != 0)
      throw std::invalid_argument("memory_sweep: sizes must be positive multiples of 8");
    SweepRow row;
    row.side = side;
    row.pixels = static_cast<std::size_t>(side) * side;
    memprof::set_alloc_cap(hard_cap);
    try {
      row.peak_bytes = tracked_run(model, Workload::forward, Dims4{1, side, side, 3}).peak_bytes;
    } catch (const memprof::CapExceeded&) {
      row.aborted = true;
      row.peak_bytes = memprof::peak_bytes();
    }
    memprof::set_alloc_cap(previous_cap);
    report.rows.push_back(row);
  }
  fit_line(report);
  for (SweepRow& row : report.rows) {
    const bool measured_over = label_cap != 0 && !row.aborted && row.peak_bytes > label_cap;
    const bool predicted_over =
        label_cap != 0 && report.fit_valid &&
        report.slope * static_cast<double>(row.pixels) + report.intercept >
            static_cast<double>(label_cap);
    row.over_cap = row.aborted || measured_over || predicted_over;
  }
  return report;
}

std::string format_sweep_csv(const SweepReport& report) {
  std::ostringstream out;
  out << "pixels,peak_bytes,status\n";
  for (const SweepRow& row : report.rows) {
    out << row.pixels << ',' << row.peak_bytes << ','
        << (row.aborted ? "aborted" : (row.over_cap ? "over_cap" : "ok")) << '\n';
  }
  if (report.fit_valid) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "# fit: peak = %.6g * pixels + %.6g, r2 = %.6f\n",
                  report.slope, report.intercept, report.r2);
    out << buf;
  } else {
    out << "# fit: undefined (fewer than two completed sizes)\n";
  }
  if (report.label_cap != 0) out << "# cap: " << report.label_cap << " bytes\n";
  return out.str();
}

std::vector<TiledVsWholeRow> tiled_vs_whole(const GanModel& model, const std::vector<int>& sizes,
                                            int tile, int stride) {
  std::vector<TiledVsWholeRow> rows;
  const TileTranslator translator = make_translator(model, Direction::AtoB);
  for (int side : sizes) {
    TiledVsWholeRow row;
    row.side = side;
    row.pixels = static_cast<std::size_t>(side) * side;
    row.whole_peak = tracked_run(model, Workload::forward, Dims4{1, side, side, 3}).peak_bytes;

    const ImageBuffer img = synthetic_noise_image(side, side, 0xC0FFEEULL + side);
    const TileGrid grid = plan_grid(side, side, tile, tile, stride, stride);
    memprof::reset_peak();
    translate_image(translator, img, grid, TileScaleMode::native());
    row.tiled_peak = memprof::peak_bytes();
    rows.push_back(row);
  }
  return rows;
}

std::string format_tiled_vs_whole_csv(const std::vector<TiledVsWholeRow>& rows) {
  std::ostringstream out;
  out << "pixels,whole_peak_bytes,tiled_peak_bytes\n";
  for (const TiledVsWholeRow& row : rows)
    out << row.pixels << ',' << row.whole_peak << ',' << row.tiled_peak << '\n';
  return out.str();
}

}  // namespace tilegan
