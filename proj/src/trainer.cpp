#include "tilegan/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "tilegan/checkpoint.hpp"

namespace tilegan {

namespace {

SamplerConfig sampler_config(const TrainConfig& cfg, std::uint64_t seed_offset) {
  SamplerConfig sc;
  sc.x_batch = cfg.x_batch;
  sc.y_batch = cfg.y_batch;
  sc.batch_size = cfg.batch_size;
  sc.allow_flip_h = cfg.allow_flip_h;
  sc.allow_flip_v = cfg.allow_flip_v;
  sc.seed = cfg.seed + seed_offset;
  return sc;
}

void check_config(const TrainConfig& cfg) {
  if (cfg.iterations < 1) throw std::invalid_argument("train: iterations must be >= 1");
  if (cfg.checkpoint_interval < 0 || cfg.checkpoint_interval > cfg.iterations)
    throw std::invalid_argument("train: checkpoint interval must be in [0, iterations]");
}

}  // namespace

Trainer::Trainer(TrainConfig cfg, std::vector<ImageBuffer> domain_a,
                 std::vector<ImageBuffer> domain_b)
    : Trainer(std::move(cfg), std::move(domain_a), std::move(domain_b), std::nullopt) {}

Trainer::Trainer(TrainConfig cfg, std::vector<ImageBuffer> domain_a,
                 std::vector<ImageBuffer> domain_b, std::optional<GanModel> model)
    : cfg_((check_config(cfg), cfg)),
      model_(model ? std::move(*model) : GanModel(cfg.arch, cfg.seed)),
      sampler_a_(sampler_config(cfg_, 0x5a5a5a5aULL), std::move(domain_a)),
      sampler_b_(sampler_config(cfg_, 0xb0b0b0b0ULL), std::move(domain_b)),
      opt_gen_(cfg_.adam, model_.generator_params()),
      opt_disc_(cfg_.adam, model_.discriminator_params()) {}

Trainer Trainer::resume(TrainConfig cfg, const std::string& checkpoint_prefix,
                        std::vector<ImageBuffer> domain_a, std::vector<ImageBuffer> domain_b) {
  GanModel model = load_model(checkpoint_prefix + ".tgck");
  cfg.arch = model.arch();
  Trainer t(std::move(cfg), std::move(domain_a), std::move(domain_b), std::move(model));
  t.load_train_state(checkpoint_prefix + ".tgop");
  t.last_checkpoint_ = checkpoint_prefix + ".tgck";
  return t;
}

TrainLogRecord Trainer::train_step(const TrainingBatch& batch_a, const TrainingBatch& batch_b) {
  if (!(batch_a.tensor.dims() == batch_b.tensor.dims()))
    throw std::invalid_argument("train_step: domain batches must have equal dims");

  const auto t0 = std::chrono::steady_clock::now();
  memprof::reset_peak();

  const Tensor4& real_a = batch_a.tensor;
  const Tensor4& real_b = batch_b.tensor;

  // Generator forwards, recorded; reused by the generator update below.
  Tensor4 fake_b = model_.translate(Direction::AtoB, real_a);
  Tensor4 fake_a = model_.translate(Direction::BtoA, real_b);

  // Discriminators first, on detached fakes.
  opt_disc_.zero_grad();
  Tensor4 d_loss = lsgan_disc_loss(model_.discriminate(Domain::A, real_a),
                                   model_.discriminate(Domain::A, fake_a.detach()),
                                   model_.discriminate(Domain::B, real_b),
                                   model_.discriminate(Domain::B, fake_b.detach()));
  backward(d_loss);
  opt_disc_.step();

  // Generator objective: adversarial (against the updated discriminators)
  // plus both reconstruction cycles.
  Tensor4 rec_a = model_.translate(Direction::BtoA, fake_b);
  Tensor4 rec_b = model_.translate(Direction::AtoB, fake_a);
  Tensor4 cyc = add(mean_all(abs(sub(rec_a, real_a))), mean_all(abs(sub(rec_b, real_b))));
  Tensor4 g_adv = lsgan_gen_loss(model_.discriminate(Domain::A, fake_a),
                                 model_.discriminate(Domain::B, fake_b));
  Tensor4 total = add(mul_scalar(g_adv, cfg_.loss.w_gan), mul_scalar(cyc, cfg_.loss.w_cycle));
  opt_gen_.zero_grad();
  backward(total);
  opt_gen_.step();
  // The generator backward also deposited gradients on the discriminators;
  // they were not stepped and are cleared on the next iteration's zero_grad.

  TrainLogRecord rec;
  rec.iteration = ++iteration_;
  rec.disc_loss = d_loss.scalar();
  rec.gen_loss = g_adv.scalar();
  rec.cycle_loss = cyc.scalar();
  rec.peak_bytes = memprof::peak_bytes();
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  if (!std::isfinite(rec.disc_loss) || !std::isfinite(rec.gen_loss) ||
      !std::isfinite(rec.cycle_loss))
    throw TrainAbort("train_step: non-finite loss at iteration " + std::to_string(rec.iteration),
                     last_checkpoint_);
  return rec;
}

std::string Trainer::save_checkpoint(const std::string& prefix) const {
  save_model(prefix + ".tgck", model_);

  std::vector<CheckpointEntry> entries;
  auto scalar = [](const std::string& name, float v) {
    return CheckpointEntry{name, Dims4{1, 1, 1, 1}, {v}};
  };
  entries.push_back(scalar("adam.lr", cfg_.adam.lr));
  entries.push_back(scalar("adam.beta1", cfg_.adam.beta1));
  entries.push_back(scalar("adam.beta2", cfg_.adam.beta2));
  entries.push_back(scalar("adam.epsilon", cfg_.adam.epsilon));
  entries.push_back(scalar("gen.t", static_cast<float>(opt_gen_.step_count())));
  entries.push_back(scalar("disc.t", static_cast<float>(opt_disc_.step_count())));
  entries.push_back(scalar("iteration", static_cast<float>(iteration_)));

  auto collect = [&entries](const std::string& prefix2, const AdamOptimizer& opt) {
    const auto& params = opt.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
      const AdamState& st = opt.state(i);
      const Dims4 dims = params[i].second.dims();
      entries.push_back({prefix2 + "." + params[i].first + ".m", dims,
                         std::vector<float>(st.m.begin(), st.m.end())});
      entries.push_back({prefix2 + "." + params[i].first + ".v", dims,
                         std::vector<float>(st.v.begin(), st.v.end())});
    }
  };
  collect("gen", opt_gen_);
  collect("disc", opt_disc_);
  entries.push_back(
      {"rng.sampler_a", Dims4{1, 1, 1, 8}, pack_rng_state(sampler_a_.rng().state())});
  entries.push_back(
      {"rng.sampler_b", Dims4{1, 1, 1, 8}, pack_rng_state(sampler_b_.rng().state())});
  write_entries(prefix + ".tgop", kOptimizerMagic, entries);
  return prefix + ".tgck";
}

void Trainer::load_train_state(const std::string& path) {
  const std::vector<CheckpointEntry> entries = read_entries(path, kOptimizerMagic);
  std::map<std::string, const CheckpointEntry*> by_name;
  for (const CheckpointEntry& e : entries) by_name[e.name] = &e;

  auto need = [&by_name, &path](const std::string& name) -> const CheckpointEntry& {
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw std::runtime_error("checkpoint: " + path + " missing entry '" + name + "'");
    return *it->second;
  };

  iteration_ = static_cast<std::int64_t>(need("iteration").data[0]);
  opt_gen_.set_step_count(static_cast<std::int64_t>(need("gen.t").data[0]));
  opt_disc_.set_step_count(static_cast<std::int64_t>(need("disc.t").data[0]));

  auto restore = [&need](const std::string& prefix2, AdamOptimizer& opt) {
    const auto& params = opt.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
      const CheckpointEntry& m = need(prefix2 + "." + params[i].first + ".m");
      const CheckpointEntry& v = need(prefix2 + "." + params[i].first + ".v");
      AdamState& st = opt.state(i);
      if (m.data.size() != st.m.size() || v.data.size() != st.v.size())
        throw std::runtime_error("checkpoint: moment shape mismatch for " + params[i].first);
      std::copy(m.data.begin(), m.data.end(), st.m.begin());
      std::copy(v.data.begin(), v.data.end(), st.v.begin());
    }
  };
  restore("gen", opt_gen_);
  restore("disc", opt_disc_);
  sampler_a_.rng().set_state(unpack_rng_state(need("rng.sampler_a").data));
  sampler_b_.rng().set_state(unpack_rng_state(need("rng.sampler_b").data));
}

TrainResult Trainer::train() {
  TrainResult result;
  result.log.reserve(static_cast<std::size_t>(cfg_.iterations - iteration_));
  while (iteration_ < cfg_.iterations) {
    const TrainingBatch batch_a = sampler_a_.next_batch();
    const TrainingBatch batch_b = sampler_b_.next_batch();
    result.log.push_back(train_step(batch_a, batch_b));
    if (cfg_.checkpoint_interval > 0 && iteration_ % cfg_.checkpoint_interval == 0 &&
        iteration_ < cfg_.iterations) {
      last_checkpoint_ = save_checkpoint(
          (std::filesystem::path(cfg_.out_dir) / ("ckpt_" + std::to_string(iteration_)))
              .string());
    }
  }
  last_checkpoint_ =
      save_checkpoint((std::filesystem::path(cfg_.out_dir) / "ckpt_final").string());
  result.checkpoint_path = last_checkpoint_;
  if (!cfg_.log_path.empty()) {
    std::ofstream out(cfg_.log_path, std::ios::trunc);
    if (!out) throw std::runtime_error("train: cannot open log " + cfg_.log_path);
    out << format_log_csv(result.log);
  }
  return result;
}

TrainResult train(const TrainConfig& cfg, std::vector<ImageBuffer> domain_a,
                  std::vector<ImageBuffer> domain_b) {
  Trainer t(cfg, std::move(domain_a), std::move(domain_b));
  return t.train();
}

std::string format_log_csv(const std::vector<TrainLogRecord>& log) {
  std::ostringstream out;
  out << "iteration,disc_loss,gen_loss,cycle_loss,wall_ms,peak_bytes\n";
  for (const TrainLogRecord& r : log) {
    out << r.iteration << ',';
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.3f,", r.disc_loss, r.gen_loss,
                  r.cycle_loss, r.wall_ms);
    out << buf << r.peak_bytes << '\n';
  }
  return out.str();
}

}  // namespace tilegan
