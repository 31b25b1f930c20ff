#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tilegan/adam.hpp"
#include "tilegan/gan.hpp"
#include "tilegan/sampler.hpp"

namespace tilegan {

struct TrainConfig {
  std::int64_t iterations = 1;
  int batch_size = 1;
  int x_batch = 128;
  int y_batch = 128;
  bool allow_flip_h = true;
  bool allow_flip_v = true;
  std::uint64_t seed = 1;
  GanArch arch;
  LossWeights loss;
  AdamConfig adam;
  std::int64_t checkpoint_interval = 0;  // 0: only at exit; otherwise <= iterations
  std::string out_dir = ".";
  std::string log_path;  // optional CSV log
};

struct TrainLogRecord {
  std::int64_t iteration = 0;  // 1-based
  float disc_loss = 0.0f;
  float gen_loss = 0.0f;   // adversarial generator term
  float cycle_loss = 0.0f;
  double wall_ms = 0.0;
  std::size_t peak_bytes = 0;  // tracked tensor high-water mark for this step
};

/// Raised when a step produces a non-finite loss; carries the most recent
/// successfully written checkpoint (empty when none exists yet).
class TrainAbort : public std::runtime_error {
public:
  TrainAbort(const std::string& what, std::string last_checkpoint)
      : std::runtime_error(what), last_checkpoint_(std::move(last_checkpoint)) {}
  const std::string& last_checkpoint() const { return last_checkpoint_; }

private:
  std::string last_checkpoint_;
};

struct TrainResult {
  std::string checkpoint_path;  // final model file
  std::vector<TrainLogRecord> log;
};

/// Owns the model, both optimizers, and both domain samplers for one run.
/// The update loop is: draw one batch per domain, update the discriminators
/// on (real, detached fake), then update the generators on the adversarial
/// plus cycle objective; one Adam step each.
class Trainer {
public:
  Trainer(TrainConfig cfg, std::vector<ImageBuffer> domain_a,
          std::vector<ImageBuffer> domain_b);

  /// Resumes from `<prefix>.tgck` / `<prefix>.tgop`, restoring model weights,
  /// optimizer moments, step counters, and both sampler RNG streams.
  static Trainer resume(TrainConfig cfg, const std::string& checkpoint_prefix,
                        std::vector<ImageBuffer> domain_a, std::vector<ImageBuffer> domain_b);

  /// One training iteration on externally supplied batches.
  TrainLogRecord train_step(const TrainingBatch& batch_a, const TrainingBatch& batch_b);

  /// Runs the remaining iteration budget, checkpointing at the configured
  /// cadence and at exit.
  TrainResult train();

  GanModel& model() { return model_; }
  const GanModel& model() const { return model_; }
  Sampler& sampler_a() { return sampler_a_; }
  Sampler& sampler_b() { return sampler_b_; }
  std::int64_t completed_iterations() const { return iteration_; }

  /// Writes `<prefix>.tgck` (model) and `<prefix>.tgop` (optimizer + RNG).
  std::string save_checkpoint(const std::string& prefix) const;

private:
  Trainer(TrainConfig cfg, std::vector<ImageBuffer> domain_a, std::vector<ImageBuffer> domain_b,
          std::optional<GanModel> model);
  void load_train_state(const std::string& path);

  TrainConfig cfg_;
  GanModel model_;
  Sampler sampler_a_;
  Sampler sampler_b_;
  AdamOptimizer opt_gen_;
  AdamOptimizer opt_disc_;
  std::int64_t iteration_ = 0;
  std::string last_checkpoint_;
};

/// Convenience wrapper: construct a Trainer and run the full budget.
TrainResult train(const TrainConfig& cfg, std::vector<ImageBuffer> domain_a,
                  std::vector<ImageBuffer> domain_b);

std::string format_log_csv(const std::vector<TrainLogRecord>& log);

}  // namespace tilegan
