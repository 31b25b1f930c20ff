#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tilegan/ops.hpp"
#include "tilegan/tensor.hpp"

namespace tilegan {

/// Width/depth knobs for the encoder-decoder GAN. The defaults reproduce the
/// full-scale network: down-convolutions 7x7(64), 3x3(128/256/512), a
/// 3+2(shared)+3 stack of 512-channel residual blocks, mirrored
/// up-convolutions, and a four-stage discriminator with a 1x1 score head.
struct GanArch {
  int base_channels = 64;
  int private_blocks = 3;
  int shared_blocks = 2;
  float leaky_alpha = 0.2f;
  float norm_eps = 1e-5f;

  std::vector<LayerSpec> generator_layers() const;
  std::vector<LayerSpec> discriminator_layers() const;

  /// Total float parameter count of the full model (both generators sharing
  /// the core, both discriminators), from the layer algebra alone.
  std::int64_t parameter_count() const;

  bool operator==(const GanArch&) const = default;
};

enum class Direction { AtoB, BtoA };
enum class Domain { A, B };

struct ConvParams {
  Tensor4 w;
  Tensor4 b;
  int stride = 1;
  int padding = 0;
};

struct EncoderParams {
  std::vector<ConvParams> downs;
  std::vector<ResidualParams> blocks;
};

struct DecoderParams {
  std::vector<ResidualParams> blocks;
  std::vector<ConvParams> ups;  // transposed convolutions; last one maps to RGB
};

struct DiscriminatorParams {
  std::vector<ConvParams> convs;
};

using NamedParams = std::vector<std::pair<std::string, Tensor4>>;

/// Two-domain translation model. The shared residual core is physically the
/// same storage for both directions: an update through either path is
/// observed by the other. Training mutates the model single-threaded; a
/// frozen model is safe for concurrent translate calls.
class GanModel {
public:
  GanModel(GanArch arch, std::uint64_t init_seed);

  const GanArch& arch() const { return arch_; }

  /// Full generator pass. Requires 3 channels and spatial dims divisible by 8.
  Tensor4 translate(Direction dir, const Tensor4& x) const;

  /// Patch-level score map at 1/16 resolution. Requires 3 channels and
  /// spatial dims divisible by 16.
  Tensor4 discriminate(Domain domain, const Tensor4& x) const;

  NamedParams generator_params() const;
  NamedParams discriminator_params() const;
  NamedParams all_params() const;

  const EncoderParams& encoder(Domain d) const { return d == Domain::A ? enc_a_ : enc_b_; }
  const std::vector<ResidualParams>& shared_core() const { return shared_; }
  const DecoderParams& decoder(Domain d) const { return d == Domain::A ? dec_a_ : dec_b_; }
  const DiscriminatorParams& discriminator(Domain d) const {
    return d == Domain::A ? disc_a_ : disc_b_;
  }

private:
  GanArch arch_;
  EncoderParams enc_a_, enc_b_;
  std::vector<ResidualParams> shared_;
  DecoderParams dec_a_, dec_b_;
  DiscriminatorParams disc_a_, disc_b_;
};

/// Generic tile/image translator; the tiler and tests program against this
/// instead of a concrete model. dims_multiple is the spatial divisibility the
/// callable requires of its inputs (8 for GanModel generators).
struct TileTranslator {
  std::function<Tensor4(const Tensor4&)> fn;
  int dims_multiple = 1;
};

/// Frozen-model translator running under NoGradGuard.
TileTranslator make_translator(const GanModel& model, Direction dir);

// Least-squares adversarial objectives over score maps. Discriminators are
// pushed toward 1 on real and 0 on fake; generators toward 1 on their fakes.
// Each loss is the mean over score maps, averaged across both domains.
Tensor4 mse_vs_const(const Tensor4& scores, float target);
Tensor4 lsgan_disc_loss(const Tensor4& d_real_a, const Tensor4& d_fake_a,
                        const Tensor4& d_real_b, const Tensor4& d_fake_b);
Tensor4 lsgan_gen_loss(const Tensor4& d_fake_a, const Tensor4& d_fake_b);

struct GanLossPair {
  Tensor4 disc_loss;
  Tensor4 gen_loss;
};

/// LSGAN objectives via the model's discriminators. fake_a/fake_b are images
/// in the respective domain (typically generator outputs or their detached
/// copies).
GanLossPair gan_losses(const GanModel& model, const Tensor4& real_a, const Tensor4& real_b,
                       const Tensor4& fake_a, const Tensor4& fake_b);

/// Sum of the two reconstruction errors: MAE(G_BA(G_AB(x_A)), x_A) +
/// MAE(G_AB(G_BA(x_B)), x_B).
Tensor4 cycle_loss(const GanModel& model, const Tensor4& x_a, const Tensor4& x_b);

/// Composition point used by cycle_loss and by tests with stubbed generators.
Tensor4 cycle_loss_with(const std::function<Tensor4(const Tensor4&)>& g_ab,
                        const std::function<Tensor4(const Tensor4&)>& g_ba,
                        const Tensor4& x_a, const Tensor4& x_b);

struct LossWeights {
  float w_gan = 1.0f;
  float w_cycle = 10.0f;
};

}  // namespace tilegan
