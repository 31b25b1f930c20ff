// Acceptance suite: one or more checks per numbered criterion, selected by
// argv[1]. Each criterion prints a single PASS/FAIL line with the measured
// numbers; the process exits 0 only if its criterion passed.

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "ref_ops.hpp"
#include "test_util.hpp"
#include "tilegan/checkpoint.hpp"
#include "tilegan/profile.hpp"
#include "tilegan/tiler.hpp"
#include "tilegan/trainer.hpp"

using namespace tilegan;
namespace fs = std::filesystem;

namespace {

bool g_failed = false;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!pass) g_failed = true;
}

std::string work_dir(const std::string& name) {
  const std::string dir = (fs::temp_directory_path() / name).string();
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::uint8_t> file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

GanArch narrow_arch(int base, int private_blocks = 3, int shared_blocks = 2) {
  GanArch arch;
  arch.base_channels = base;
  arch.private_blocks = private_blocks;
  arch.shared_blocks = shared_blocks;
  return arch;
}

// ---------------------------------------------------------------------------
// Criterion 1: tiled translation peak is independent of the image size.

void criterion_1() {
  const GanModel model(narrow_arch(8), 1);
  const TileTranslator translator = make_translator(model, Direction::AtoB);
  std::vector<std::size_t> peaks;
  std::ostringstream detail;
  detail << "tiled 128x128/stride 64 peaks:";
  for (int side : {512, 2048, 4096}) {
    const ImageBuffer img = synthetic_noise_image(side, side, 100 + side);
    const TileGrid grid = plan_grid(side, side, 128, 128, 64, 64);
    memprof::reset_peak();
    translate_parallel(translator, img, grid, TileScaleMode::native(), 1);
    peaks.push_back(memprof::peak_bytes());
    detail << ' ' << side << "^2=" << peaks.back();
  }
  bool pass = true;
  for (std::size_t p : peaks) {
    const double ratio = static_cast<double>(p) / static_cast<double>(peaks[0]);
    pass &= ratio > 0.99 && ratio < 1.01;
  }
  report(1, pass, detail.str() + (pass ? " (equal within 1%)" : " (spread exceeds 1%)"));
}

// ---------------------------------------------------------------------------
// Criterion 2: whole-image peak grows linearly with pixels (full-scale net).

void criterion_2() {
  const GanModel model(GanArch{}, 2);  // full default architecture
  const SweepReport sweep = memory_sweep(model, {128, 192, 256, 384, 512});
  std::ostringstream detail;
  detail.precision(6);
  detail << "R^2=" << sweep.r2 << ", slope=" << sweep.slope << " bytes/pixel";
  report(2, sweep.fit_valid && sweep.r2 > 0.99 && sweep.slope > 0.0, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 3: finite-difference gradient checks, >= 20 tiny instances per op.

struct FdTally {
  double worst = 0.0;
  int worst_instance = -1;
  int instances = 0;
  bool pass = true;
  void add(double err) {
    if (err > worst) {
      worst = err;
      worst_instance = instances;
    }
    ++instances;
    pass &= err < 1e-3;
  }
};

void criterion_3() {
  using testutil::finite_difference_check;
  using testutil::finite_difference_check_guarded;
  using testutil::irand;
  using testutil::random_tensor;

  std::mt19937 rng(303);
  FdTally conv_t, convt_t, in_t, act_t, res_t, lsgan_t, cycle_t;

  for (int trial = 0; trial < 20; ++trial) {
    // conv2d
    {
      const int ci = irand(rng, 1, 3), co = irand(rng, 1, 3);
      const int k = trial % 2 == 0 ? 3 : 1;
      const int s = irand(rng, 1, 2), p = k / 2;
      Tensor4 x = random_tensor(Dims4{irand(rng, 1, 2), irand(rng, 3, 5), irand(rng, 3, 5), ci},
                                rng, true);
      Tensor4 w = random_tensor(Dims4{co, k, k, ci}, rng, true);
      Tensor4 b = random_tensor(Dims4{1, 1, 1, co}, rng, true);
      Tensor4 target = random_tensor(conv2d(x, w, b, s, p).dims(), rng, false);
      conv_t.add(finite_difference_check(
          {x, w, b}, [&] { return mean_all(square(sub(conv2d(x, w, b, s, p), target))); },
          [&] {
            return refops::mean_square(refops::sub(
                refops::conv2d(refops::lift(x), refops::lift(w), refops::lift(b), s, p),
                refops::lift(target)));
          }));
    }
    // conv2d_transpose
    {
      const int ci = irand(rng, 1, 3), co = irand(rng, 1, 3);
      const int s = irand(rng, 1, 2), p = irand(rng, 0, 1);
      Tensor4 x = random_tensor(Dims4{irand(rng, 1, 2), irand(rng, 2, 4), irand(rng, 2, 4), ci},
                                rng, true);
      Tensor4 w = random_tensor(Dims4{ci, 3, 3, co}, rng, true);
      Tensor4 b = random_tensor(Dims4{1, 1, 1, co}, rng, true);
      Tensor4 target = random_tensor(conv2d_transpose(x, w, b, s, p).dims(), rng, false);
      convt_t.add(finite_difference_check(
          {x, w, b},
          [&] { return mean_all(square(sub(conv2d_transpose(x, w, b, s, p), target))); },
          [&] {
            return refops::mean_square(refops::sub(
                refops::conv2d_transpose(refops::lift(x), refops::lift(w), refops::lift(b), s,
                                         p),
                refops::lift(target)));
          }));
    }
    // instance norm
    {
      const int c = irand(rng, 1, 3);
      const float eps = 1e-5f;
      Tensor4 x = random_tensor(Dims4{irand(rng, 1, 2), irand(rng, 3, 5), irand(rng, 3, 5), c},
                                rng, true);
      Tensor4 gamma = random_tensor(Dims4{1, 1, 1, c}, rng, true, 0.5, 1.5);
      Tensor4 beta = random_tensor(Dims4{1, 1, 1, c}, rng, true, -0.3, 0.3);
      Tensor4 target = random_tensor(x.dims(), rng, false);
      in_t.add(finite_difference_check(
          {x, gamma, beta},
          [&] { return mean_all(square(sub(instance_norm(x, gamma, beta, eps), target))); },
          [&] {
            return refops::mean_square(
                refops::sub(refops::instance_norm(refops::lift(x), refops::lift(gamma),
                                                  refops::lift(beta), eps),
                            refops::lift(target)));
          }));
    }
    // activations (sampled away from the kink; all three kinds)
    {
      Tensor4 x = Tensor4::zeros(Dims4{1, 3, 3, 2}, true);
      for (float& v : x.values()) {
        const double mag = testutil::urand(rng, 0.05, 1.0);
        v = static_cast<float>(testutil::urand(rng) < 0.5 ? -mag : mag);
      }
      act_t.add(finite_difference_check(
          {x}, [&] { return mean_all(square(leaky_relu(x, 0.2f))); },
          [&] { return refops::mean_square(refops::leaky_relu(refops::lift(x), 0.2)); }));
      act_t.add(finite_difference_check(
          {x}, [&] { return mean_all(square(relu(x))); },
          [&] { return refops::mean_square(refops::relu(refops::lift(x))); }));
      act_t.add(finite_difference_check(
          {x}, [&] { return mean_all(square(tilegan::tanh(x))); },
          [&] { return refops::mean_square(refops::tanh(refops::lift(x))); }));
    }
    // residual block
    {
      const int c = 2;
      Tensor4 x = random_tensor(Dims4{1, 4, 4, c}, rng, true);
      ResidualParams p;
      p.conv1_w = random_tensor(Dims4{c, 3, 3, c}, rng, true, -0.4, 0.4);
      p.conv1_b = random_tensor(Dims4{1, 1, 1, c}, rng, true, -0.1, 0.1);
      p.gamma1 = random_tensor(Dims4{1, 1, 1, c}, rng, true, 0.5, 1.5);
      p.beta1 = random_tensor(Dims4{1, 1, 1, c}, rng, true, -0.2, 0.2);
      p.conv2_w = random_tensor(Dims4{c, 3, 3, c}, rng, true, -0.4, 0.4);
      p.conv2_b = random_tensor(Dims4{1, 1, 1, c}, rng, true, -0.1, 0.1);
      p.gamma2 = random_tensor(Dims4{1, 1, 1, c}, rng, true, 0.5, 1.5);
      p.beta2 = random_tensor(Dims4{1, 1, 1, c}, rng, true, -0.2, 0.2);
      Tensor4 target = random_tensor(x.dims(), rng, false);
      res_t.add(finite_difference_check_guarded(
          {x, p.conv1_w, p.conv1_b, p.gamma1, p.beta1, p.conv2_w, p.conv2_b, p.gamma2, p.beta2},
          [&] { return mean_all(square(sub(residual_block(x, p), target))); },
          [&](std::vector<double>& trace) {
            refops::SignTraceScope scope(trace);
            return refops::mean_square(refops::sub(
                refops::residual_block(refops::lift(x), refops::lift(p)), refops::lift(target)));
          },
          nullptr, 1e-3, 1e-5));
    }
    // LSGAN generator loss and cycle loss on a tiny model. Kink-crossing
    // probes are skipped and element disagreements below the measured 2.5e-4
    // oracle floor count as matching (see the harness notes).
    {
      GanModel model(narrow_arch(1, 0, 1), 7000 + trial);
      Tensor4 a = random_tensor(Dims4{1, 16, 16, 3}, rng, true);
      Tensor4 b = random_tensor(Dims4{1, 16, 16, 3}, rng, true);
      std::vector<Tensor4> probes = {a, b};
      const NamedParams params = model.all_params();
      for (int pick = 0; pick < 3; ++pick)
        probes.push_back(params[(trial * 7 + pick * 11) % params.size()].second);

      lsgan_t.add(finite_difference_check_guarded(
          probes,
          [&] {
            Tensor4 fake_b = model.translate(Direction::AtoB, a);
            Tensor4 fake_a = model.translate(Direction::BtoA, b);
            return lsgan_gen_loss(model.discriminate(Domain::A, fake_a),
                                  model.discriminate(Domain::B, fake_b));
          },
          [&](std::vector<double>& trace) {
            refops::SignTraceScope scope(trace);
            refops::DTensor fake_b = refops::translate(model, Direction::AtoB, refops::lift(a));
            refops::DTensor fake_a = refops::translate(model, Direction::BtoA, refops::lift(b));
            return 0.5 *
                   (refops::mse_vs_const(refops::discriminate(model, Domain::A, fake_a), 1.0) +
                    refops::mse_vs_const(refops::discriminate(model, Domain::B, fake_b), 1.0));
          },
          nullptr, 1e-3, 2.5e-4));

      cycle_t.add(finite_difference_check_guarded(
          probes, [&] { return cycle_loss(model, a, b); },
          [&](std::vector<double>& trace) {
            refops::SignTraceScope scope(trace);
            refops::DTensor rec_a = refops::translate(
                model, Direction::BtoA, refops::translate(model, Direction::AtoB, refops::lift(a)));
            refops::DTensor rec_b = refops::translate(
                model, Direction::AtoB, refops::translate(model, Direction::BtoA, refops::lift(b)));
            return refops::mean_abs_diff(rec_a, refops::lift(a)) +
                   refops::mean_abs_diff(rec_b, refops::lift(b));
          },
          nullptr, 1e-3, 2.5e-4));
    }
  }

  std::ostringstream detail;
  detail.precision(3);
  detail << "max rel err over >=20 instances each: conv=" << conv_t.worst
         << " convT=" << convt_t.worst << " inorm=" << in_t.worst << " act=" << act_t.worst
         << " residual=" << res_t.worst << " lsgan=" << lsgan_t.worst
         << " cycle=" << cycle_t.worst;
  report(3,
         conv_t.pass && convt_t.pass && in_t.pass && act_t.pass && res_t.pass && lsgan_t.pass &&
             cycle_t.pass,
         detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 4: adjoint identity on 100 random instances.

void criterion_4() {
  using testutil::irand;
  using testutil::random_tensor;
  std::mt19937 rng(404);
  double worst = 0.0;
  int done = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 1 + 2 * irand(rng, 0, 2);
    const int s = irand(rng, 1, 2);
    const int p = irand(rng, 0, k / 2);
    const int ci = irand(rng, 1, 3), co = irand(rng, 1, 3);
    const int oh = irand(rng, 1, 4), ow = irand(rng, 1, 4);
    const int h = s * (oh - 1) + k - 2 * p + (s - 1);
    const int w_ = s * (ow - 1) + k - 2 * p + (s - 1);

    Tensor4 x = random_tensor(Dims4{1, h, w_, ci}, rng, false);
    Tensor4 w = random_tensor(Dims4{co, k, k, ci}, rng, false);
    Tensor4 cx = conv2d(x, w, Tensor4::zeros(Dims4{1, 1, 1, co}), s, p);
    Tensor4 y = random_tensor(cx.dims(), rng, false);
    Tensor4 cty = conv2d_transpose(y, w, Tensor4::zeros(Dims4{1, 1, 1, ci}), s, p);

    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < cx.size(); ++i)
      lhs += static_cast<double>(cx.data()[i]) * y.data()[i];
    for (std::size_t i = 0; i < x.size(); ++i)
      rhs += static_cast<double>(x.data()[i]) * cty.data()[i];
    worst = std::max(worst, testutil::rel_err(lhs, rhs));
    ++done;
  }
  std::ostringstream detail;
  detail.precision(3);
  detail << "max rel deviation of <conv(x,w),y> vs <x,convT(y,w)> over " << done
         << " instances: " << worst;
  report(4, worst < 1e-4, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 5: Eq-count oracle.

void criterion_5() {
  bool pass = true;
  for (int xf = 1; xf <= 40 && pass; ++xf)
    for (int yf = 1; yf <= 40 && pass; ++yf)
      for (int xb = 1; xb <= xf && pass; ++xb)
        for (int yb = 1; yb <= yf && pass; ++yb) {
          std::int64_t brute = 0;
          for (int x0 = 0; x0 < xf - xb; ++x0)
            for (int y0 = 0; y0 < yf - yb; ++y0) ++brute;
          if (count_subsamples(xf, yf, xb, yb) != brute) pass = false;
        }
  const std::int64_t big = count_subsamples(5000, 3000, 128, 128);
  pass &= big == 13992384;
  std::ostringstream detail;
  detail << "exhaustive enumeration up to 40x40 matched; (5000,3000,128,128) -> " << big;
  report(5, pass, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 6: tiling correctness.

void criterion_6() {
  using testutil::irand;
  std::mt19937 rng(606);
  bool identity_ok = true;
  int worst_delta = 0;
  TileTranslator identity;
  identity.fn = [](const Tensor4& x) { return x; };
  for (int trial = 0; trial < 50; ++trial) {
    const int w = irand(rng, 4, 48), h = irand(rng, 4, 48);
    const ImageBuffer img = synthetic_noise_image(w, h, 600 + trial);
    const int tw = irand(rng, 1, w), th = irand(rng, 1, h);
    const TileGrid grid = plan_grid(w, h, tw, th, irand(rng, 1, tw), irand(rng, 1, th));
    const ImageBuffer out = translate_image(identity, img, grid, TileScaleMode::native());
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
      worst_delta = std::max(worst_delta, std::abs(int(out.pixels[i]) - int(img.pixels[i])));
  }
  identity_ok = worst_delta <= 1;

  bool weights_ok = true;
  for (int trial = 0; trial < 50 && weights_ok; ++trial) {
    const int w = irand(rng, 2, 40), h = irand(rng, 2, 40);
    const int tw = irand(rng, 1, w), th = irand(rng, 1, h);
    const TileGrid grid = plan_grid(w, h, tw, th, irand(rng, 1, tw), irand(rng, 1, th));
    BlendAccumulator acc(w, h);
    std::vector<float> zero_tile(static_cast<std::size_t>(tw) * th * 3, 0.0f);
    std::vector<int> cover(static_cast<std::size_t>(w) * h, 0);
    for (const CropSpec& t : grid.tiles) {
      acc.add_tile(t, zero_tile.data());
      for (int y = t.y0; y < t.y0 + t.h; ++y)
        for (int x = t.x0; x < t.x0 + t.w; ++x) ++cover[static_cast<std::size_t>(y) * w + x];
    }
    for (int y = 0; y < h && weights_ok; ++y)
      for (int x = 0; x < w; ++x)
        if (acc.weight_at(x, y) != static_cast<float>(cover[static_cast<std::size_t>(y) * w + x])) {
          weights_ok = false;
          break;
        }
  }

  const GanModel model(narrow_arch(2, 1, 2), 66);
  const TileTranslator translator = make_translator(model, Direction::AtoB);
  const ImageBuffer img = synthetic_noise_image(96, 64, 660);
  const TileGrid grid = plan_grid(96, 64, 32, 32, 16, 16);
  const ImageBuffer sequential = translate_image(translator, img, grid, TileScaleMode::native());
  bool parallel_ok = true;
  for (int workers : {1, 2, 8})
    parallel_ok &=
        translate_parallel(translator, img, grid, TileScaleMode::native(), workers) == sequential;

  // Informational throughput benchmark (not a gate): parallel tiling on a
  // 2048^2 image, 4 workers vs 1.
  const ImageBuffer big = synthetic_noise_image(2048, 2048, 661);
  const TileGrid big_grid = plan_grid(2048, 2048, 128, 128, 128, 128);
  auto timed = [&](int workers) {
    const auto t0 = std::chrono::steady_clock::now();
    translate_parallel(translator, big, big_grid, TileScaleMode::native(), workers);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  const double t1 = timed(1);
  const double t4 = timed(4);

  std::ostringstream detail;
  detail.precision(3);
  detail << "identity-stub worst |delta|=" << worst_delta
         << "/1 over 50 geometries; weight buffers exact; workers {1,2,8} byte-equal="
         << (parallel_ok ? "yes" : "no") << "; informational 2048^2 speedup 4v1 workers: "
         << t1 / t4 << "x on " << std::thread::hardware_concurrency() << " core(s)";
  report(6, identity_ok && weights_ok && parallel_ok, detail.str());
}

// ---------------------------------------------------------------------------
// Criteria 7 & 8: the toy one-shot training experiment.

ImageBuffer toy_domain_a() {
  // Gray-noise texture: constant 32x32 blocks of random gray. The block size
  // keeps crops representable through the latent bottleneck at every zoom
  // level, so the reconstruction objective has room to fall.
  ImageBuffer img(512, 512);
  Rng rng(0x70F0ULL);
  const int block = 32;
  for (int by = 0; by < 512 / block; ++by)
    for (int bx = 0; bx < 512 / block; ++bx) {
      const std::uint8_t v = static_cast<std::uint8_t>(rng.uniform(256));
      for (int y = by * block; y < (by + 1) * block; ++y)
        for (int x = bx * block; x < (bx + 1) * block; ++x)
          for (int c = 0; c < 3; ++c) img.set(x, y, c, v);
    }
  return img;
}

ImageBuffer toy_domain_b(const ImageBuffer& a) {
  // The same texture under a fixed hue/brightness shift. Per-channel mean
  // gaps of ~55-90 gray levels keep the 50%-progress gate well clear of the
  // few-gray-level wander GAN means exhibit over training.
  auto shift = [](double v, double scale, double offset) {
    return static_cast<std::uint8_t>(std::clamp(v * scale + offset, 0.0, 255.0));
  };
  ImageBuffer img = a;
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    img.pixels[p * 3 + 0] = shift(a.pixels[p * 3 + 0], 0.5, 120.0);
    img.pixels[p * 3 + 1] = shift(a.pixels[p * 3 + 1], 0.5, 5.0);
    img.pixels[p * 3 + 2] = shift(a.pixels[p * 3 + 2], 0.5, 150.0);
  }
  return img;
}

TrainConfig toy_config(const std::string& out_dir) {
  TrainConfig cfg;
  cfg.iterations = 2000;
  cfg.batch_size = 8;
  cfg.x_batch = 64;
  cfg.y_batch = 64;
  cfg.seed = 4242;
  cfg.arch = narrow_arch(4, 1, 2);
  cfg.adam.lr = 3e-4f;
  cfg.loss.w_gan = 1.0f;
  cfg.loss.w_cycle = 10.0f;
  cfg.out_dir = out_dir;
  return cfg;
}

std::array<double, 3> channel_means(const ImageBuffer& img) {
  std::array<double, 3> m{};
  for (std::size_t p = 0; p < img.pixel_count(); ++p)
    for (int c = 0; c < 3; ++c) m[c] += img.pixels[p * 3 + c];
  for (int c = 0; c < 3; ++c) m[c] /= static_cast<double>(img.pixel_count());
  return m;
}

std::string canonical_loss_log(const std::vector<TrainLogRecord>& log) {
  // Deterministic record fields only; wall time is not a loss.
  std::ostringstream out;
  for (const TrainLogRecord& r : log) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%" PRId64 ",%.9g,%.9g,%.9g,%zu\n", r.iteration,
                  r.disc_loss, r.gen_loss, r.cycle_loss, r.peak_bytes);
    out << buf;
  }
  return out.str();
}

void criterion_7() {
  const std::string dir = work_dir("tilegan_acc7");
  const ImageBuffer a = toy_domain_a();
  const ImageBuffer b = toy_domain_b(a);

  const TrainResult result = train(toy_config(dir), {a}, {b});

  const double cycle_at_10 = result.log[9].cycle_loss;
  double cycle_final = 0.0;
  for (std::size_t i = result.log.size() - 10; i < result.log.size(); ++i)
    cycle_final += result.log[i].cycle_loss;
  cycle_final /= 10.0;
  const bool gate_a = cycle_final < 0.5 * cycle_at_10;

  const GanModel model = load_model(result.checkpoint_path);
  const TileTranslator translator = make_translator(model, Direction::AtoB);
  const ImageBuffer translated = translate_full(translator, a, 128, 128, 64, 64,
                                                TileScaleMode::native(), 1);
  const auto mean_a = channel_means(a);
  const auto mean_b = channel_means(b);
  const auto mean_t = channel_means(translated);
  bool gate_b = true;
  std::ostringstream shifts;
  shifts.precision(3);
  for (int c = 0; c < 3; ++c) {
    const double gap = std::abs(mean_a[c] - mean_b[c]);
    const double closed = gap - std::abs(mean_t[c] - mean_b[c]);
    const double progress = closed / gap;
    shifts << (c ? "/" : "") << progress * 100 << '%';
    gate_b &= progress >= 0.5;
  }

  std::ostringstream detail;
  detail.precision(4);
  detail << "cycle@10=" << cycle_at_10 << " mean(cycle@1991..2000)=" << cycle_final
         << " (drop " << (1.0 - cycle_final / cycle_at_10) * 100 << "%, need >50%); "
         << "per-channel mean shift toward B: " << shifts.str() << " (need >=50%)";
  report(7, gate_a && gate_b, detail.str());
  fs::remove_all(dir);
}

void criterion_8() {
  const ImageBuffer a = toy_domain_a();
  const ImageBuffer b = toy_domain_b(a);

  const std::string d1 = work_dir("tilegan_acc8_run1");
  const std::string d2 = work_dir("tilegan_acc8_run2");
  const TrainResult r1 = train(toy_config(d1), {a}, {b});
  const TrainResult r2 = train(toy_config(d2), {a}, {b});

  const bool logs_equal = canonical_loss_log(r1.log) == canonical_loss_log(r2.log);
  const bool model_equal = file_bytes(r1.checkpoint_path) == file_bytes(r2.checkpoint_path);
  const bool opt_equal =
      file_bytes(d1 + "/ckpt_final.tgop") == file_bytes(d2 + "/ckpt_final.tgop");

  std::ostringstream detail;
  detail << "loss logs byte-identical=" << (logs_equal ? "yes" : "no")
         << ", model checkpoints byte-identical=" << (model_equal ? "yes" : "no")
         << ", optimizer state byte-identical=" << (opt_equal ? "yes" : "no");
  report(8, logs_equal && model_equal && opt_equal, detail.str());
  fs::remove_all(d1);
  fs::remove_all(d2);
}

// ---------------------------------------------------------------------------
// Criterion 9: shared-latent plumbing.

void criterion_9() {
  GanModel model(narrow_arch(4, 1, 2), 9);
  std::mt19937 rng(909);
  Tensor4 x = testutil::random_tensor(Dims4{1, 32, 32, 3}, rng, false);
  Tensor4 probe = testutil::random_tensor(Dims4{1, 32, 32, 3}, rng, false);

  std::vector<std::vector<float>> before;
  for (const ResidualParams& blk : model.shared_core())
    before.emplace_back(blk.conv1_w.data().begin(), blk.conv1_w.data().end());

  Tensor4 ba_before;
  {
    NoGradGuard guard;
    ba_before = model.translate(Direction::BtoA, probe);
  }

  AdamOptimizer opt(AdamConfig{.lr = 1e-3f}, model.generator_params());
  opt.zero_grad();
  backward(mean_all(square(model.translate(Direction::AtoB, x))));
  opt.step();

  bool all_blocks_changed = model.shared_core().size() == 2;
  for (std::size_t i = 0; i < model.shared_core().size(); ++i) {
    bool changed = false;
    const auto after = model.shared_core()[i].conv1_w.data();
    for (std::size_t j = 0; j < before[i].size(); ++j)
      if (before[i][j] != after[j]) changed = true;
    all_blocks_changed &= changed;
  }

  Tensor4 ba_after;
  {
    NoGradGuard guard;
    ba_after = model.translate(Direction::BtoA, probe);
  }
  bool observed = false;
  for (std::size_t i = 0; i < ba_before.size(); ++i)
    if (ba_before.data()[i] != ba_after.data()[i]) observed = true;

  std::ostringstream detail;
  detail << "A->B-only Adam step mutated both shared residual blocks="
         << (all_blocks_changed ? "yes" : "no")
         << "; B->A output changed through the same storage=" << (observed ? "yes" : "no");
  report(9, all_blocks_changed && observed, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 10: CLI bookkeeping against the published image table.

void criterion_10() {
  const std::string dir = work_dir("tilegan_acc10");
  struct Row {
    int w, h;
    const char* mpx;
  };
  const Row rows[] = {{15884, 3271, "51.96"},
                      {12895, 3472, "44.77"},
                      {5472, 3648, "19.96"},
                      {5472, 3648, "19.96"},
                      {2448, 2448, "5.99"}};
  bool pass = true;
  std::ostringstream detail;
  detail << "megapixels:";
  for (std::size_t i = 0; i < 5; ++i) {
    ImageBuffer img(rows[i].w, rows[i].h);
    std::fill(img.pixels.begin(), img.pixels.end(), static_cast<std::uint8_t>(40 + 10 * i));
    const std::string path = dir + "/img" + std::to_string(i) + ".png";
    save_png(path, img);

    const std::string cmd = std::string(TILEGAN_CLI_PATH) + " info " + path;
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string output;
    char buf[512];
    std::size_t n;
    while (pipe && (n = fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, n);
    if (pipe) pclose(pipe);

    const std::string want = std::string("megapixels: ") + rows[i].mpx + "\n";
    const bool ok = output.find(want) != std::string::npos;
    pass &= ok;
    detail << ' ' << rows[i].w << 'x' << rows[i].h << "->" << rows[i].mpx
           << (ok ? " ok" : " MISMATCH");
    fs::remove(path);
  }

  // Eq-count bookkeeping through the same command.
  {
    ImageBuffer img(5000, 3000);
    const std::string path = dir + "/count.png";
    save_png(path, img);
    const std::string cmd = std::string(TILEGAN_CLI_PATH) + " info " + path;
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string output;
    char buf[512];
    std::size_t n;
    while (pipe && (n = fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, n);
    if (pipe) pclose(pipe);
    const bool ok = output.find("subsamples(128x128): 13992384\n") != std::string::npos;
    pass &= ok;
    detail << "; 5000x3000 subsamples=13992384" << (ok ? " ok" : " MISMATCH");
  }
  report(10, pass, detail.str());
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: acceptance <criterion 1..10>\n");
    return 2;
  }
  const int criterion = std::atoi(argv[1]);
  switch (criterion) {
    case 1: criterion_1(); break;
    case 2: criterion_2(); break;
    case 3: criterion_3(); break;
    case 4: criterion_4(); break;
    case 5: criterion_5(); break;
    case 6: criterion_6(); break;
    case 7: criterion_7(); break;
    case 8: criterion_8(); break;
    case 9: criterion_9(); break;
    case 10: criterion_10(); break;
    default:
      std::fprintf(stderr, "unknown criterion %d\n", criterion);
      return 2;
  }
  return g_failed ? 1 : 0;
}
