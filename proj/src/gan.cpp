#include "tilegan/gan.hpp"

#include <cmath>
#include <stdexcept>

#include "tilegan/rng.hpp"

namespace tilegan {

std::vector<LayerSpec> GanArch::generator_layers() const {
  const int w = base_channels;
  std::vector<LayerSpec> layers;
  layers.push_back({LayerKind::down_conv, 7, w, NormKind::none, ActKind::leaky_relu, 1, false});
  layers.push_back({LayerKind::down_conv, 3, 2 * w, NormKind::none, ActKind::leaky_relu, 2, false});
  layers.push_back({LayerKind::down_conv, 3, 4 * w, NormKind::none, ActKind::leaky_relu, 2, false});
  layers.push_back({LayerKind::down_conv, 3, 8 * w, NormKind::none, ActKind::leaky_relu, 2, false});
  for (int i = 0; i < private_blocks; ++i)
    layers.push_back({LayerKind::residual, 3, 8 * w, NormKind::instance, ActKind::relu, 1, false});
  for (int i = 0; i < shared_blocks; ++i)
    layers.push_back({LayerKind::residual, 3, 8 * w, NormKind::instance, ActKind::relu, 1, true});
  for (int i = 0; i < private_blocks; ++i)
    layers.push_back({LayerKind::residual, 3, 8 * w, NormKind::instance, ActKind::relu, 1, false});
  layers.push_back({LayerKind::up_conv, 3, 4 * w, NormKind::none, ActKind::leaky_relu, 2, false});
  layers.push_back({LayerKind::up_conv, 3, 2 * w, NormKind::none, ActKind::leaky_relu, 2, false});
  layers.push_back({LayerKind::up_conv, 3, w, NormKind::none, ActKind::leaky_relu, 2, false});
  layers.push_back({LayerKind::up_conv, 3, 3, NormKind::none, ActKind::tanh, 1, false});
  return layers;
}

std::vector<LayerSpec> GanArch::discriminator_layers() const {
  const int w = base_channels;
  std::vector<LayerSpec> layers;
  layers.push_back({LayerKind::down_conv, 3, w, NormKind::none, ActKind::leaky_relu, 2, false});
  layers.push_back({LayerKind::down_conv, 3, 2 * w, NormKind::none, ActKind::leaky_relu, 2, false});
  layers.push_back({LayerKind::down_conv, 3, 4 * w, NormKind::none, ActKind::leaky_relu, 2, false});
  layers.push_back({LayerKind::down_conv, 3, 8 * w, NormKind::none, ActKind::leaky_relu, 2, false});
  layers.push_back({LayerKind::down_conv, 1, 1, NormKind::none, ActKind::leaky_relu, 1, false});
  return layers;
}

std::int64_t GanArch::parameter_count() const {
  auto conv_params = [](int k, int in_ch, int out_ch) {
    return static_cast<std::int64_t>(k) * k * in_ch * out_ch + out_ch;
  };
  auto residual_params = [&](int ch) {
    // two 3x3 convs plus two instance norms (gamma, beta)
    return 2 * conv_params(3, ch, ch) + 4 * static_cast<std::int64_t>(ch);
  };

  std::int64_t encoder = 0, decoder = 0, disc = 0, core = 0;
  int in_ch = 3;
  for (const LayerSpec& spec : generator_layers()) {
    if (spec.kind == LayerKind::down_conv) {
      encoder += conv_params(spec.filter_size, in_ch, spec.out_channels);
      in_ch = spec.out_channels;
    }
  }
  const int ch = 8 * base_channels;
  encoder += static_cast<std::int64_t>(private_blocks) * residual_params(ch);
  core = static_cast<std::int64_t>(shared_blocks) * residual_params(ch);
  decoder = static_cast<std::int64_t>(private_blocks) * residual_params(ch);
  in_ch = ch;
  for (const LayerSpec& spec : generator_layers()) {
    if (spec.kind == LayerKind::up_conv) {
      decoder += conv_params(spec.filter_size, in_ch, spec.out_channels);
      in_ch = spec.out_channels;
    }
  }
  in_ch = 3;
  for (const LayerSpec& spec : discriminator_layers()) {
    disc += conv_params(spec.filter_size, in_ch, spec.out_channels);
    in_ch = spec.out_channels;
  }
  return 2 * (encoder + decoder + disc) + core;
}

namespace {

Tensor4 gaussian_tensor(Dims4 dims, float stddev, Rng& rng) {
  Tensor4 t = Tensor4::zeros(dims, true);
  for (float& v : t.values()) v = static_cast<float>(rng.gaussian()) * stddev;
  return t;
}

ConvParams init_conv(int k, int in_ch, int out_ch, int stride, Rng& rng) {
  const float stddev = std::sqrt(2.0f / (static_cast<float>(k) * k * in_ch));
  ConvParams p;
  p.w = gaussian_tensor(Dims4{out_ch, k, k, in_ch}, stddev, rng);
  p.b = Tensor4::zeros(Dims4{1, 1, 1, out_ch}, true);
  p.stride = stride;
  p.padding = k / 2;
  return p;
}

// Transposed conv weights are stored as (layer_in, k, k, layer_out).
ConvParams init_upconv(int k, int in_ch, int out_ch, int stride, Rng& rng) {
  const float stddev = std::sqrt(2.0f / (static_cast<float>(k) * k * in_ch));
  ConvParams p;
  p.w = gaussian_tensor(Dims4{in_ch, k, k, out_ch}, stddev, rng);
  p.b = Tensor4::zeros(Dims4{1, 1, 1, out_ch}, true);
  p.stride = stride;
  p.padding = k / 2;
  return p;
}

ResidualParams init_residual(int ch, float eps, Rng& rng) {
  ResidualParams p;
  const float stddev = std::sqrt(2.0f / (9.0f * ch));
  p.conv1_w = gaussian_tensor(Dims4{ch, 3, 3, ch}, stddev, rng);
  p.conv1_b = Tensor4::zeros(Dims4{1, 1, 1, ch}, true);
  p.gamma1 = Tensor4::full(Dims4{1, 1, 1, ch}, 1.0f, true);
  p.beta1 = Tensor4::zeros(Dims4{1, 1, 1, ch}, true);
  p.conv2_w = gaussian_tensor(Dims4{ch, 3, 3, ch}, stddev, rng);
  p.conv2_b = Tensor4::zeros(Dims4{1, 1, 1, ch}, true);
  p.gamma2 = Tensor4::full(Dims4{1, 1, 1, ch}, 1.0f, true);
  p.beta2 = Tensor4::zeros(Dims4{1, 1, 1, ch}, true);
  p.eps = eps;
  return p;
}

void collect_conv(NamedParams& out, const std::string& prefix, const ConvParams& p) {
  out.emplace_back(prefix + ".w", p.w);
  out.emplace_back(prefix + ".b", p.b);
}

void collect_residual(NamedParams& out, const std::string& prefix, const ResidualParams& p) {
  out.emplace_back(prefix + ".conv1.w", p.conv1_w);
  out.emplace_back(prefix + ".conv1.b", p.conv1_b);
  out.emplace_back(prefix + ".in1.gamma", p.gamma1);
  out.emplace_back(prefix + ".in1.beta", p.beta1);
  out.emplace_back(prefix + ".conv2.w", p.conv2_w);
  out.emplace_back(prefix + ".conv2.b", p.conv2_b);
  out.emplace_back(prefix + ".in2.gamma", p.gamma2);
  out.emplace_back(prefix + ".in2.beta", p.beta2);
}

}  // namespace

GanModel::GanModel(GanArch arch, std::uint64_t init_seed) : arch_(arch) {
  if (arch_.base_channels < 1 || arch_.private_blocks < 0 || arch_.shared_blocks < 1)
    throw std::invalid_argument("GanModel: invalid architecture");
  Rng rng(init_seed);
  const float eps = arch_.norm_eps;

  auto build_encoder = [&](EncoderParams& enc) {
    int in_ch = 3;
    for (const LayerSpec& spec : arch_.generator_layers()) {
      if (spec.kind != LayerKind::down_conv) continue;
      enc.downs.push_back(init_conv(spec.filter_size, in_ch, spec.out_channels, spec.stride, rng));
      in_ch = spec.out_channels;
    }
    for (int i = 0; i < arch_.private_blocks; ++i)
      enc.blocks.push_back(init_residual(in_ch, eps, rng));
  };
  auto build_decoder = [&](DecoderParams& dec) {
    int in_ch = 8 * arch_.base_channels;
    for (int i = 0; i < arch_.private_blocks; ++i)
      dec.blocks.push_back(init_residual(in_ch, eps, rng));
    for (const LayerSpec& spec : arch_.generator_layers()) {
      if (spec.kind != LayerKind::up_conv) continue;
      dec.ups.push_back(init_upconv(spec.filter_size, in_ch, spec.out_channels, spec.stride, rng));
      in_ch = spec.out_channels;
    }
  };
  auto build_disc = [&](DiscriminatorParams& disc) {
    int in_ch = 3;
    for (const LayerSpec& spec : arch_.discriminator_layers()) {
      disc.convs.push_back(init_conv(spec.filter_size, in_ch, spec.out_channels, spec.stride, rng));
      in_ch = spec.out_channels;
    }
  };

  build_encoder(enc_a_);
  build_encoder(enc_b_);
  const int core_ch = 8 * arch_.base_channels;
  for (int i = 0; i < arch_.shared_blocks; ++i)
    shared_.push_back(init_residual(core_ch, eps, rng));
  build_decoder(dec_a_);
  build_decoder(dec_b_);
  build_disc(disc_a_);
  build_disc(disc_b_);
}

Tensor4 GanModel::translate(Direction dir, const Tensor4& x) const {
  const Dims4 d = x.dims();
  if (d.c != 3) throw std::invalid_argument("translate: input must have 3 channels");
  if (d.h % 8 != 0 || d.w % 8 != 0)
    throw std::invalid_argument("translate: spatial dims must be divisible by 8, got " +
                                std::to_string(d.w) + "x" + std::to_string(d.h));

  const EncoderParams& enc = encoder(dir == Direction::AtoB ? Domain::A : Domain::B);
  const DecoderParams& dec = decoder(dir == Direction::AtoB ? Domain::B : Domain::A);
  const float alpha = arch_.leaky_alpha;
  const bool profiled = memprof::phase_active();

  Tensor4 h = x;
  for (std::size_t i = 0; i < enc.downs.size(); ++i) {
    if (profiled) memprof::mark_phase("down" + std::to_string(i));
    const ConvParams& c = enc.downs[i];
    h = leaky_relu(conv2d(h, c.w, c.b, c.stride, c.padding), alpha);
  }
  for (std::size_t i = 0; i < enc.blocks.size(); ++i) {
    if (profiled) memprof::mark_phase("enc_res" + std::to_string(i));
    h = residual_block(h, enc.blocks[i]);
  }
  for (std::size_t i = 0; i < shared_.size(); ++i) {
    if (profiled) memprof::mark_phase("core_res" + std::to_string(i));
    h = residual_block(h, shared_[i]);
  }
  for (std::size_t i = 0; i < dec.blocks.size(); ++i) {
    if (profiled) memprof::mark_phase("dec_res" + std::to_string(i));
    h = residual_block(h, dec.blocks[i]);
  }
  for (std::size_t i = 0; i < dec.ups.size(); ++i) {
    if (profiled) memprof::mark_phase("up" + std::to_string(i));
    const ConvParams& c = dec.ups[i];
    h = conv2d_transpose(h, c.w, c.b, c.stride, c.padding);
    h = (i + 1 == dec.ups.size()) ? tanh(h) : leaky_relu(h, alpha);
  }
  return h;
}

Tensor4 GanModel::discriminate(Domain domain, const Tensor4& x) const {
  const Dims4 d = x.dims();
  if (d.c != 3) throw std::invalid_argument("discriminate: input must have 3 channels");
  if (d.h % 16 != 0 || d.w % 16 != 0)
    throw std::invalid_argument("discriminate: spatial dims must be divisible by 16, got " +
                                std::to_string(d.w) + "x" + std::to_string(d.h));
  Tensor4 h = x;
  for (const ConvParams& c : discriminator(domain).convs)
    h = leaky_relu(conv2d(h, c.w, c.b, c.stride, c.padding), arch_.leaky_alpha);
  return h;
}

NamedParams GanModel::generator_params() const {
  NamedParams out;
  auto collect_encoder = [&](const std::string& name, const EncoderParams& enc) {
    for (std::size_t i = 0; i < enc.downs.size(); ++i)
      collect_conv(out, name + ".down" + std::to_string(i), enc.downs[i]);
    for (std::size_t i = 0; i < enc.blocks.size(); ++i)
      collect_residual(out, name + ".res" + std::to_string(i), enc.blocks[i]);
  };
  auto collect_decoder = [&](const std::string& name, const DecoderParams& dec) {
    for (std::size_t i = 0; i < dec.blocks.size(); ++i)
      collect_residual(out, name + ".res" + std::to_string(i), dec.blocks[i]);
    for (std::size_t i = 0; i < dec.ups.size(); ++i)
      collect_conv(out, name + ".up" + std::to_string(i), dec.ups[i]);
  };
  collect_encoder("enc_a", enc_a_);
  collect_encoder("enc_b", enc_b_);
  for (std::size_t i = 0; i < shared_.size(); ++i)
    collect_residual(out, "core.res" + std::to_string(i), shared_[i]);
  collect_decoder("dec_a", dec_a_);
  collect_decoder("dec_b", dec_b_);
  return out;
}

NamedParams GanModel::discriminator_params() const {
  NamedParams out;
  for (std::size_t i = 0; i < disc_a_.convs.size(); ++i)
    collect_conv(out, "disc_a.conv" + std::to_string(i), disc_a_.convs[i]);
  for (std::size_t i = 0; i < disc_b_.convs.size(); ++i)
    collect_conv(out, "disc_b.conv" + std::to_string(i), disc_b_.convs[i]);
  return out;
}

NamedParams GanModel::all_params() const {
  NamedParams out = generator_params();
  NamedParams disc = discriminator_params();
  out.insert(out.end(), disc.begin(), disc.end());
  return out;
}

TileTranslator make_translator(const GanModel& model, Direction dir) {
  TileTranslator t;
  t.dims_multiple = 8;
  t.fn = [&model, dir](const Tensor4& x) {
    NoGradGuard guard;
    return model.translate(dir, x);
  };
  return t;
}

Tensor4 mse_vs_const(const Tensor4& scores, float target) {
  return mean_all(square(add_scalar(scores, -target)));
}

Tensor4 lsgan_disc_loss(const Tensor4& d_real_a, const Tensor4& d_fake_a,
                        const Tensor4& d_real_b, const Tensor4& d_fake_b) {
  Tensor4 term_a = add(mse_vs_const(d_real_a, 1.0f), mse_vs_const(d_fake_a, 0.0f));
  Tensor4 term_b = add(mse_vs_const(d_real_b, 1.0f), mse_vs_const(d_fake_b, 0.0f));
  return mul_scalar(add(term_a, term_b), 0.25f);
}

Tensor4 lsgan_gen_loss(const Tensor4& d_fake_a, const Tensor4& d_fake_b) {
  return mul_scalar(add(mse_vs_const(d_fake_a, 1.0f), mse_vs_const(d_fake_b, 1.0f)), 0.5f);
}

GanLossPair gan_losses(const GanModel& model, const Tensor4& real_a, const Tensor4& real_b,
                       const Tensor4& fake_a, const Tensor4& fake_b) {
  GanLossPair out;
  out.disc_loss = lsgan_disc_loss(model.discriminate(Domain::A, real_a),
                                  model.discriminate(Domain::A, fake_a),
                                  model.discriminate(Domain::B, real_b),
                                  model.discriminate(Domain::B, fake_b));
  out.gen_loss = lsgan_gen_loss(model.discriminate(Domain::A, fake_a),
                                model.discriminate(Domain::B, fake_b));
  return out;
}

Tensor4 cycle_loss_with(const std::function<Tensor4(const Tensor4&)>& g_ab,
                        const std::function<Tensor4(const Tensor4&)>& g_ba,
                        const Tensor4& x_a, const Tensor4& x_b) {
  Tensor4 rec_a = g_ba(g_ab(x_a));
  Tensor4 rec_b = g_ab(g_ba(x_b));
  return add(mean_all(abs(sub(rec_a, x_a))), mean_all(abs(sub(rec_b, x_b))));
}

Tensor4 cycle_loss(const GanModel& model, const Tensor4& x_a, const Tensor4& x_b) {
  auto g_ab = [&model](const Tensor4& x) { return model.translate(Direction::AtoB, x); };
  auto g_ba = [&model](const Tensor4& x) { return model.translate(Direction::BtoA, x); };
  return cycle_loss_with(g_ab, g_ba, x_a, x_b);
}

}  // namespace tilegan
