#pragma once

#include "tilegan/tensor.hpp"

namespace tilegan {

enum class LayerKind { down_conv, up_conv, residual, activation };
enum class NormKind { none, instance };
enum class ActKind { leaky_relu, relu, tanh, none };

/// One row of a network architecture table.
struct LayerSpec {
  LayerKind kind;
  int filter_size = 3;   // odd
  int out_channels = 0;
  NormKind norm = NormKind::none;
  ActKind activation = ActKind::none;
  int stride = 1;
  bool shared = false;
};

// Convolution with NHWC input and (out_ch, k, k, in_ch) weights; bias has
// dims (1,1,1,out_ch). Output spatial extent is floor((h + 2p - k)/stride)+1.
Tensor4 conv2d(const Tensor4& input, const Tensor4& weights, const Tensor4& bias,
               int stride, int padding);

// Transposed convolution ("up-convolution"). Weights have dims
// (in_ch, k, k, out_ch); output spatial extent is stride*(h-1) + k - 2p
// + (stride-1), so a stride-2 k=3 p=1 layer exactly doubles the input.
// With the extra term dropped (stride 1) this computes the adjoint of
// conv2d under the inner product: <conv(x,w), y> == <x, convT(y,w)>
// whenever the shapes line up.
Tensor4 conv2d_transpose(const Tensor4& input, const Tensor4& weights, const Tensor4& bias,
                         int stride, int padding);

// Per-sample, per-channel normalization over the spatial plane. gamma and
// beta have dims (1,1,1,c). eps must be > 0 when the plane is a single pixel.
Tensor4 instance_norm(const Tensor4& input, const Tensor4& gamma, const Tensor4& beta,
                      float eps);

Tensor4 leaky_relu(const Tensor4& input, float alpha);
Tensor4 relu(const Tensor4& input);
Tensor4 tanh(const Tensor4& input);

Tensor4 add(const Tensor4& a, const Tensor4& b);
Tensor4 sub(const Tensor4& a, const Tensor4& b);
Tensor4 add_scalar(const Tensor4& a, float s);
Tensor4 mul_scalar(const Tensor4& a, float s);
Tensor4 square(const Tensor4& a);
Tensor4 abs(const Tensor4& a);

// Full reductions to a 1x1x1x1 scalar tensor (64-bit accumulation inside).
Tensor4 sum_all(const Tensor4& a);
Tensor4 mean_all(const Tensor4& a);

/// Parameters of one residual block: conv -> instance norm -> relu -> conv ->
/// instance norm, added back onto the input.
struct ResidualParams {
  Tensor4 conv1_w, conv1_b, gamma1, beta1;
  Tensor4 conv2_w, conv2_b, gamma2, beta2;
  float eps = 1e-5f;
};

Tensor4 residual_block(const Tensor4& input, const ResidualParams& params);

}  // namespace tilegan
