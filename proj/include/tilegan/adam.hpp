#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tilegan/tensor.hpp"

namespace tilegan {

struct AdamConfig {
  float lr = 1e-4f;
  float beta1 = 0.5f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;
};

/// Per-parameter Adam moment buffers plus the shared step counter.
struct AdamState {
  memprof::FloatBuf m;
  memprof::FloatBuf v;
};

/// Bias-corrected Adam over a fixed set of named parameters. The parameter
/// set is pinned at construction; step() applies one update from the
/// gradients currently held by the parameters.
class AdamOptimizer {
public:
  AdamOptimizer(AdamConfig config, std::vector<std::pair<std::string, Tensor4>> params);

  /// One bias-corrected update; increments t by exactly 1. Parameters whose
  /// gradient is zero everywhere still advance the moments.
  void step();

  void zero_grad();

  const AdamConfig& config() const { return config_; }
  std::int64_t step_count() const { return t_; }
  void set_step_count(std::int64_t t) { t_ = t; }

  const std::vector<std::pair<std::string, Tensor4>>& params() const { return params_; }
  AdamState& state(std::size_t index) { return states_[index]; }
  const AdamState& state(std::size_t index) const { return states_[index]; }

private:
  AdamConfig config_;
  std::vector<std::pair<std::string, Tensor4>> params_;
  std::vector<AdamState> states_;
  std::int64_t t_ = 0;
};

/// Free-function form of the update rule for a single parameter buffer;
/// `t` must already be incremented to the step being applied (t >= 1).
void adam_step(std::span<float> param, std::span<const float> grad, AdamState& state,
               const AdamConfig& config, std::int64_t t);

}  // namespace tilegan
