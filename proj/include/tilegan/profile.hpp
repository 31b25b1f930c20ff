#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tilegan/gan.hpp"
#include "tilegan/image.hpp"
#include "tilegan/memprof.hpp"

namespace tilegan {

enum class Workload { forward, forward_backward };

/// High-water memory report for one tracked run.
struct MemReport {
  std::size_t peak_bytes = 0;
  std::vector<memprof::PhaseSample> samples;  // per-layer running high-water marks
  std::size_t input_pixels = 0;
};

/// Runs one generator pass (A->B) over a deterministic synthetic input of the
/// given dims, with graph recording on (training-style retention), and
/// reports the tracked high-water mark with per-layer attribution.
/// forward_backward additionally sweeps gradients from mean(output).
MemReport tracked_run(const GanModel& model, Workload workload, Dims4 input_dims);

struct SweepRow {
  int side = 0;
  std::size_t pixels = 0;
  std::size_t peak_bytes = 0;
  bool aborted = false;   // hard cap hit; peak_bytes is the partial high-water
  bool over_cap = false;  // measured or fit-predicted peak exceeds the label cap
};

struct SweepReport {
  std::vector<SweepRow> rows;
  bool fit_valid = false;  // needs >= 2 completed sizes
  double slope = 0.0;      // bytes per pixel
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t label_cap = 0;
};

/// Whole-image forward passes at each square size; fits peak bytes against
/// pixel count. hard_cap (bytes) aborts a size gracefully when tracked
/// allocations would exceed it; label_cap only marks rows, emulating a GPU
/// memory limit line.
SweepReport memory_sweep(const GanModel& model, const std::vector<int>& sizes,
                         std::size_t hard_cap = 0, std::size_t label_cap = 0);

std::string format_sweep_csv(const SweepReport& report);

struct TiledVsWholeRow {
  int side = 0;
  std::size_t pixels = 0;
  std::size_t whole_peak = 0;
  std::size_t tiled_peak = 0;
};

/// The motivating comparison: whole-image pass peak grows with pixels while
/// the tiled pass peak stays put at fixed tile config.
std::vector<TiledVsWholeRow> tiled_vs_whole(const GanModel& model, const std::vector<int>& sizes,
                                            int tile, int stride);

std::string format_tiled_vs_whole_csv(const std::vector<TiledVsWholeRow>& rows);

/// Deterministic noise image used by the profiling and acceptance workloads.
ImageBuffer synthetic_noise_image(int width, int height, std::uint64_t seed);

}  // namespace tilegan
