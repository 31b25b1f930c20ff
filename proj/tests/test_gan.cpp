#include <doctest.h>

#include "ref_ops.hpp"
#include "test_util.hpp"
#include "tilegan/adam.hpp"
#include "tilegan/gan.hpp"

using namespace tilegan;
using testutil::finite_difference_check_guarded;
using testutil::random_tensor;

namespace {

GanArch tiny_arch(int base = 2, int private_blocks = 1, int shared_blocks = 1) {
  GanArch arch;
  arch.base_channels = base;
  arch.private_blocks = private_blocks;
  arch.shared_blocks = shared_blocks;
  return arch;
}

}  // namespace

TEST_CASE("generator layer table follows the architecture table") {
  const GanArch arch;  // full-scale defaults
  const auto layers = arch.generator_layers();
  REQUIRE(layers.size() == 4 + 3 + 2 + 3 + 4);

  CHECK(layers[0].kind == LayerKind::down_conv);
  CHECK(layers[0].filter_size == 7);
  CHECK(layers[0].out_channels == 64);
  CHECK(layers[0].activation == ActKind::leaky_relu);
  CHECK(layers[0].norm == NormKind::none);
  CHECK(layers[1].out_channels == 128);
  CHECK(layers[2].out_channels == 256);
  CHECK(layers[3].out_channels == 512);
  for (int i = 4; i < 12; ++i) {
    CHECK(layers[i].kind == LayerKind::residual);
    CHECK(layers[i].out_channels == 512);
    CHECK(layers[i].norm == NormKind::instance);
    CHECK(layers[i].activation == ActKind::relu);
    CHECK(layers[i].shared == (i == 7 || i == 8));  // the 2 shared blocks
  }
  CHECK(layers[12].kind == LayerKind::up_conv);
  CHECK(layers[12].out_channels == 256);
  CHECK(layers[13].out_channels == 128);
  CHECK(layers[14].out_channels == 64);
  CHECK(layers[15].out_channels == 3);
  CHECK(layers[15].activation == ActKind::tanh);

  const auto disc = arch.discriminator_layers();
  REQUIRE(disc.size() == 5);
  CHECK(disc[0].out_channels == 64);
  CHECK(disc[3].out_channels == 512);
  CHECK(disc[4].filter_size == 1);
  CHECK(disc[4].out_channels == 1);
  CHECK(disc[4].activation == ActKind::leaky_relu);
}

TEST_CASE("full-scale parameter count is the frozen layer-algebra constant") {
  const GanArch arch;
  CHECK(arch.parameter_count() == 75424520);

  // The constructed model carries exactly that many floats.
  GanModel model(arch, 7);
  std::int64_t total = 0;
  for (const auto& [name, t] : model.all_params()) total += static_cast<std::int64_t>(t.size());
  CHECK(total == arch.parameter_count());
}

TEST_CASE("full-scale generator maps 128x128x3 to 128x128x3 inside (-1,1)") {
  GanModel model(GanArch{}, 11);
  NoGradGuard guard;
  std::mt19937 rng(1);
  Tensor4 x = random_tensor(Dims4{1, 128, 128, 3}, rng, false);
  Tensor4 y = model.translate(Direction::AtoB, x);
  CHECK(y.dims() == Dims4{1, 128, 128, 3});
  for (float v : y.data()) {
    CHECK(v > -1.0f);
    CHECK(v < 1.0f);
  }
}

TEST_CASE("small model is fully convolutional across input sizes") {
  GanModel model(tiny_arch(), 3);
  NoGradGuard guard;
  std::mt19937 rng(2);
  for (int side : {64, 128, 256}) {
    Tensor4 x = random_tensor(Dims4{1, side, side, 3}, rng, false);
    CHECK(model.translate(Direction::BtoA, x).dims() == Dims4{1, side, side, 3});
  }
  // Non-square works too.
  Tensor4 x = random_tensor(Dims4{1, 24, 64, 3}, rng, false);
  CHECK(model.translate(Direction::AtoB, x).dims() == Dims4{1, 24, 64, 3});
}

TEST_CASE("translate and discriminate validate their inputs") {
  GanModel model(tiny_arch(), 4);
  NoGradGuard guard;
  CHECK_THROWS_AS(model.translate(Direction::AtoB, Tensor4::zeros(Dims4{1, 20, 24, 3})),
                  std::invalid_argument);
  CHECK_THROWS_AS(model.translate(Direction::AtoB, Tensor4::zeros(Dims4{1, 16, 16, 1})),
                  std::invalid_argument);
  CHECK_THROWS_AS(model.discriminate(Domain::A, Tensor4::zeros(Dims4{1, 24, 24, 3})),
                  std::invalid_argument);
}

TEST_CASE("discriminator emits a 1/16-resolution score map") {
  GanModel model(tiny_arch(), 5);
  NoGradGuard guard;
  std::mt19937 rng(3);
  CHECK(model.discriminate(Domain::A, random_tensor(Dims4{1, 128, 128, 3}, rng, false)).dims() ==
        Dims4{1, 8, 8, 1});
  CHECK(model.discriminate(Domain::B, random_tensor(Dims4{2, 64, 64, 3}, rng, false)).dims() ==
        Dims4{2, 4, 4, 1});
  // Frozen weights: two evaluations of the same input agree bitwise.
  Tensor4 x = random_tensor(Dims4{1, 32, 32, 3}, rng, false);
  Tensor4 s1 = model.discriminate(Domain::A, x);
  Tensor4 s2 = model.discriminate(Domain::A, x);
  for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1.data()[i] == s2.data()[i]);
}

TEST_CASE("LSGAN losses: target attainment and the 0.5-everywhere case") {
  Tensor4 ones = Tensor4::full(Dims4{2, 4, 4, 1}, 1.0f);
  Tensor4 zeros = Tensor4::zeros(Dims4{2, 4, 4, 1});
  CHECK(lsgan_disc_loss(ones, zeros, ones, zeros).scalar() == doctest::Approx(0.0f));

  Tensor4 half = Tensor4::full(Dims4{2, 4, 4, 1}, 0.5f);
  CHECK(lsgan_disc_loss(half, half, half, half).scalar() == doctest::Approx(0.25f));
  CHECK(lsgan_gen_loss(half, half).scalar() == doctest::Approx(0.25f));
}

TEST_CASE("gan_losses through a constant-output discriminator") {
  GanModel model(tiny_arch(), 6);
  // Zero every discriminator weight, then push the final bias to 0.5: the
  // score map is 0.5 everywhere regardless of input.
  for (auto& [name, t] : model.discriminator_params()) {
    std::fill(t.values().begin(), t.values().end(), 0.0f);
    if (name.find("conv4.b") != std::string::npos) t.values()[0] = 0.5f;
  }
  NoGradGuard guard;
  std::mt19937 rng(4);
  Tensor4 a = random_tensor(Dims4{1, 16, 16, 3}, rng, false);
  Tensor4 b = random_tensor(Dims4{1, 16, 16, 3}, rng, false);
  GanLossPair losses = gan_losses(model, a, b, a, b);
  CHECK(losses.disc_loss.scalar() == doctest::Approx(0.25f));
  CHECK(losses.gen_loss.scalar() == doctest::Approx(0.25f));
}

TEST_CASE("cycle loss: identity stubs give exactly zero, and it is nonnegative") {
  auto identity = [](const Tensor4& x) { return x; };
  std::mt19937 rng(5);
  Tensor4 a = random_tensor(Dims4{1, 8, 8, 3}, rng, false);
  Tensor4 b = random_tensor(Dims4{1, 8, 8, 3}, rng, false);
  CHECK(cycle_loss_with(identity, identity, a, b).scalar() == 0.0f);

  GanModel model(tiny_arch(), 7);
  NoGradGuard guard;
  CHECK(cycle_loss(model, a, b).scalar() >= 0.0f);
}

TEST_CASE("cycle loss matches the hand-composed translate+MAE oracle") {
  GanModel model(tiny_arch(), 8);
  NoGradGuard guard;
  std::mt19937 rng(6);
  Tensor4 a = random_tensor(Dims4{1, 16, 16, 3}, rng, false);
  Tensor4 b = random_tensor(Dims4{1, 16, 16, 3}, rng, false);
  const float got = cycle_loss(model, a, b).scalar();

  Tensor4 rec_a = model.translate(Direction::BtoA, model.translate(Direction::AtoB, a));
  Tensor4 rec_b = model.translate(Direction::AtoB, model.translate(Direction::BtoA, b));
  double mae_a = 0, mae_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mae_a += std::abs(static_cast<double>(rec_a.data()[i]) - a.data()[i]);
    mae_b += std::abs(static_cast<double>(rec_b.data()[i]) - b.data()[i]);
  }
  const double want = mae_a / a.size() + mae_b / b.size();
  CHECK(got == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("shared core: an A->B update is observed by the B->A path") {
  GanModel model(tiny_arch(), 9);
  std::mt19937 rng(7);
  Tensor4 x = random_tensor(Dims4{1, 16, 16, 3}, rng, false);
  Tensor4 probe = random_tensor(Dims4{1, 16, 16, 3}, rng, false);

  std::vector<float> core_before(model.shared_core()[0].conv1_w.data().begin(),
                                 model.shared_core()[0].conv1_w.data().end());
  Tensor4 ba_before;
  {
    NoGradGuard guard;
    ba_before = model.translate(Direction::BtoA, probe);
  }

  AdamOptimizer opt(AdamConfig{.lr = 1e-2f}, model.generator_params());
  opt.zero_grad();
  backward(mean_all(square(model.translate(Direction::AtoB, x))));
  opt.step();

  // Parameter bytes moved...
  bool changed = false;
  const auto core_after = model.shared_core()[0].conv1_w.data();
  for (std::size_t i = 0; i < core_before.size(); ++i)
    if (core_before[i] != core_after[i]) changed = true;
  CHECK(changed);

  // ...and the B->A direction sees the change through the same storage.
  Tensor4 ba_after;
  {
    NoGradGuard guard;
    ba_after = model.translate(Direction::BtoA, probe);
  }
  bool output_changed = false;
  for (std::size_t i = 0; i < ba_before.size(); ++i)
    if (ba_before.data()[i] != ba_after.data()[i]) output_changed = true;
  CHECK(output_changed);
}

TEST_CASE("finite differences: generator adversarial loss on a tiny model") {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 3; ++trial) {
    GanModel model(tiny_arch(1, 0, 1), 20 + trial);
    Tensor4 a = random_tensor(Dims4{1, 16, 16, 3}, rng, true);
    Tensor4 b = random_tensor(Dims4{1, 16, 16, 3}, rng, true);

    // Rotate through representative generator parameters plus both inputs.
    std::vector<Tensor4> probes = {a, b, model.encoder(Domain::A).downs[0].w,
                                   model.shared_core()[0].conv1_w,
                                   model.decoder(Domain::B).ups.back().b};
    auto analytic = [&] {
      Tensor4 fake_b = model.translate(Direction::AtoB, a);
      Tensor4 fake_a = model.translate(Direction::BtoA, b);
      return lsgan_gen_loss(model.discriminate(Domain::A, fake_a),
                            model.discriminate(Domain::B, fake_b));
    };
    auto numeric = [&](std::vector<double>& trace) {
      refops::SignTraceScope scope(trace);
      refops::DTensor fake_b = refops::translate(model, Direction::AtoB, refops::lift(a));
      refops::DTensor fake_a = refops::translate(model, Direction::BtoA, refops::lift(b));
      const double ma =
          refops::mse_vs_const(refops::discriminate(model, Domain::A, fake_a), 1.0);
      const double mb =
          refops::mse_vs_const(refops::discriminate(model, Domain::B, fake_b), 1.0);
      return 0.5 * (ma + mb);
    };
    double checked = 0.0;
    CHECK(finite_difference_check_guarded(probes, analytic, numeric, &checked, 1e-3, 2.5e-4) <
          1e-3);
    CHECK(checked > 0.5);  // the kink guard must not hollow out the test
  }
}

TEST_CASE("finite differences: cycle loss on a tiny model") {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    GanModel model(tiny_arch(1, 0, 1), 30 + trial);
    Tensor4 a = random_tensor(Dims4{1, 16, 16, 3}, rng, true);
    Tensor4 b = random_tensor(Dims4{1, 16, 16, 3}, rng, true);
    std::vector<Tensor4> probes = {a, model.encoder(Domain::B).downs[1].w,
                                   model.shared_core()[0].gamma1,
                                   model.decoder(Domain::A).ups[0].w};
    auto analytic = [&] { return cycle_loss(model, a, b); };
    auto numeric = [&](std::vector<double>& trace) {
      refops::SignTraceScope scope(trace);
      refops::DTensor rec_a = refops::translate(
          model, Direction::BtoA, refops::translate(model, Direction::AtoB, refops::lift(a)));
      refops::DTensor rec_b = refops::translate(
          model, Direction::AtoB, refops::translate(model, Direction::BtoA, refops::lift(b)));
      return refops::mean_abs_diff(rec_a, refops::lift(a)) +
             refops::mean_abs_diff(rec_b, refops::lift(b));
    };
    double checked = 0.0;
    CHECK(finite_difference_check_guarded(probes, analytic, numeric, &checked, 1e-3, 2.5e-4) <
          1e-3);
    CHECK(checked > 0.5);
  }
}
