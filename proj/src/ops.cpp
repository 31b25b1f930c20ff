#include "tilegan/ops.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tilegan {

namespace {

using detail::TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

// Contiguous dot product with a fixed lane-wise summation order, so results
// are identical across runs and optimization levels.
inline float dot_span(const float* a, const float* b, int n) {
  float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  int i = 0;
  for (; i + 8 <= n; i += 8)
    for (int l = 0; l < 8; ++l) acc[l] += a[i + l] * b[i + l];
  float s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline void axpy_span(float* y, float g, const float* x, int n) {
  for (int i = 0; i < n; ++i) y[i] += g * x[i];
}

bool should_record(std::initializer_list<const Tensor4*> inputs) {
  if (!grad_enabled()) return false;
  for (const Tensor4* t : inputs)
    if (t->node()->needs_grad) return true;
  return false;
}

Tensor4 make_result(Dims4 dims, std::initializer_list<const Tensor4*> inputs,
                    std::function<void(TensorNode&)> backprop) {
  Tensor4 out = Tensor4::zeros(dims);
  if (should_record(inputs)) {
    TensorNode* node = out.node();
    node->needs_grad = true;
    for (const Tensor4* t : inputs) node->parents.push_back(t->node_ptr());
    node->backprop = std::move(backprop);
  }
  return out;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Tensor4 conv2d(const Tensor4& input, const Tensor4& weights, const Tensor4& bias,
               int stride, int padding) {
  const Dims4 xd = input.dims();
  const Dims4 wd = weights.dims();
  require(wd.h == wd.w, "conv2d: kernel must be square");
  const int k = wd.h;
  const int ci = xd.c, co = wd.b;
  require(wd.c == ci, "conv2d: weight in_channels (" + std::to_string(wd.c) +
                          ") do not match input channels (" + std::to_string(ci) + ")");
  require(bias.dims() == Dims4{1, 1, 1, co}, "conv2d: bias dims must be (1,1,1,out_ch)");
  require(stride >= 1, "conv2d: stride must be >= 1");
  require(padding >= 0, "conv2d: padding must be >= 0");
  require(xd.h + 2 * padding - k >= 0 && xd.w + 2 * padding - k >= 0,
          "conv2d: non-positive output dims");
  const int oh = (xd.h + 2 * padding - k) / stride + 1;
  const int ow = (xd.w + 2 * padding - k) / stride + 1;

  const Dims4 yd{xd.b, oh, ow, co};
  const NodePtr xn = input.node_ptr(), wn = weights.node_ptr(), bn = bias.node_ptr();
  const int s = stride, p = padding;

  auto backprop = [xn, wn, bn, s, p, k, yd](TensorNode& self) {
    const Dims4 xd2 = xn->dims;
    const int ci2 = xd2.c, co2 = yd.c;
    const float* dy = self.grad.data();
    const float* x = xn->data.data();
    const float* w = wn->data.data();
    const bool want_dx = xn->needs_grad;
    const bool want_dw = wn->needs_grad;
    const bool want_db = bn->needs_grad;
    float* dx = want_dx ? xn->grad.data() : nullptr;
    float* dw = want_dw ? wn->grad.data() : nullptr;
    std::vector<double> db(want_db ? co2 : 0, 0.0);

    for (int b = 0; b < yd.b; ++b) {
      for (int oy = 0; oy < yd.h; ++oy) {
        const int iy0 = oy * s - p;
        const int ky_lo = std::max(0, -iy0);
        const int ky_hi = std::min(k, xd2.h - iy0);
        for (int ox = 0; ox < yd.w; ++ox) {
          const int ix0 = ox * s - p;
          const int kx_lo = std::max(0, -ix0);
          const int kx_hi = std::min(k, xd2.w - ix0);
          const int len = (kx_hi - kx_lo) * ci2;
          const float* dyrow = dy + ((static_cast<std::size_t>(b) * yd.h + oy) * yd.w + ox) * co2;
          for (int oc = 0; oc < co2; ++oc) {
            const float g = dyrow[oc];
            if (want_db) db[oc] += g;
            if (g == 0.0f) continue;
            for (int ky = ky_lo; ky < ky_hi; ++ky) {
              const std::size_t xoff =
                  ((static_cast<std::size_t>(b) * xd2.h + (iy0 + ky)) * xd2.w + (ix0 + kx_lo)) * ci2;
              const std::size_t woff =
                  ((static_cast<std::size_t>(oc) * k + ky) * k + kx_lo) * ci2;
              if (want_dx) axpy_span(dx + xoff, g, w + woff, len);
              if (want_dw) axpy_span(dw + woff, g, x + xoff, len);
            }
          }
        }
      }
    }
    if (want_db) {
      float* dbf = bn->grad.data();
      for (int oc = 0; oc < co2; ++oc) dbf[oc] += static_cast<float>(db[oc]);
    }
  };

  Tensor4 out = make_result(yd, {&input, &weights, &bias}, backprop);

  const float* x = xn->data.data();
  const float* w = wn->data.data();
  const float* bv = bn->data.data();
  float* y = out.node()->data.data();
  for (int b = 0; b < yd.b; ++b) {
    for (int oy = 0; oy < oh; ++oy) {
      const int iy0 = oy * s - p;
      const int ky_lo = std::max(0, -iy0);
      const int ky_hi = std::min(k, xd.h - iy0);
      for (int ox = 0; ox < ow; ++ox) {
        const int ix0 = ox * s - p;
        const int kx_lo = std::max(0, -ix0);
        const int kx_hi = std::min(k, xd.w - ix0);
        const int len = (kx_hi - kx_lo) * ci;
        float* yrow = y + ((static_cast<std::size_t>(b) * oh + oy) * ow + ox) * co;
        for (int oc = 0; oc < co; ++oc) {
          float acc = bv[oc];
          for (int ky = ky_lo; ky < ky_hi; ++ky) {
            const float* xr =
                x + ((static_cast<std::size_t>(b) * xd.h + (iy0 + ky)) * xd.w + (ix0 + kx_lo)) * ci;
            const float* wr = w + ((static_cast<std::size_t>(oc) * k + ky) * k + kx_lo) * ci;
            acc += dot_span(xr, wr, len);
          }
          yrow[oc] = acc;
        }
      }
    }
  }
  return out;
}

Tensor4 conv2d_transpose(const Tensor4& input, const Tensor4& weights, const Tensor4& bias,
                         int stride, int padding) {
  const Dims4 xd = input.dims();
  const Dims4 wd = weights.dims();
  require(wd.h == wd.w, "conv2d_transpose: kernel must be square");
  const int k = wd.h;
  const int ci = xd.c, co = wd.c;
  require(wd.b == ci, "conv2d_transpose: weight in_channels (" + std::to_string(wd.b) +
                          ") do not match input channels (" + std::to_string(ci) + ")");
  require(bias.dims() == Dims4{1, 1, 1, co}, "conv2d_transpose: bias dims must be (1,1,1,out_ch)");
  require(stride >= 1, "conv2d_transpose: stride must be >= 1");
  require(padding >= 0, "conv2d_transpose: padding must be >= 0");
  const int oh = stride * (xd.h - 1) + k - 2 * padding + (stride - 1);
  const int ow = stride * (xd.w - 1) + k - 2 * padding + (stride - 1);
  require(oh >= 1 && ow >= 1, "conv2d_transpose: non-positive output dims");

  const Dims4 yd{xd.b, oh, ow, co};
  const NodePtr xn = input.node_ptr(), wn = weights.node_ptr(), bn = bias.node_ptr();
  const int s = stride, p = padding;

  auto backprop = [xn, wn, bn, s, p, k, yd](TensorNode& self) {
    const Dims4 xd2 = xn->dims;
    const int ci2 = xd2.c, co2 = yd.c;
    const float* dy = self.grad.data();
    const float* x = xn->data.data();
    const float* w = wn->data.data();
    const bool want_dx = xn->needs_grad;
    const bool want_dw = wn->needs_grad;
    const bool want_db = bn->needs_grad;
    float* dx = want_dx ? xn->grad.data() : nullptr;
    float* dw = want_dw ? wn->grad.data() : nullptr;

    if (want_db) {
      std::vector<double> db(co2, 0.0);
      const std::size_t plane = static_cast<std::size_t>(yd.b) * yd.h * yd.w;
      for (std::size_t i = 0; i < plane; ++i)
        for (int oc = 0; oc < co2; ++oc) db[oc] += dy[i * co2 + oc];
      float* dbf = bn->grad.data();
      for (int oc = 0; oc < co2; ++oc) dbf[oc] += static_cast<float>(db[oc]);
    }

    std::vector<float> acc(want_dx ? ci2 : 0);
    for (int b = 0; b < xd2.b; ++b) {
      for (int iy = 0; iy < xd2.h; ++iy) {
        for (int ix = 0; ix < xd2.w; ++ix) {
          const std::size_t xoff =
              ((static_cast<std::size_t>(b) * xd2.h + iy) * xd2.w + ix) * ci2;
          if (want_dx) std::fill(acc.begin(), acc.end(), 0.0f);
          for (int ky = 0; ky < k; ++ky) {
            const int oy = iy * s - p + ky;
            if (oy < 0 || oy >= yd.h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ox = ix * s - p + kx;
              if (ox < 0 || ox >= yd.w) continue;
              const float* dyrow =
                  dy + ((static_cast<std::size_t>(b) * yd.h + oy) * yd.w + ox) * co2;
              const std::size_t wbase = (static_cast<std::size_t>(ky) * k + kx) * co2;
              for (int ic = 0; ic < ci2; ++ic) {
                const float* wr = w + static_cast<std::size_t>(ic) * k * k * co2 + wbase;
                if (want_dx) acc[ic] += dot_span(dyrow, wr, co2);
                if (want_dw) {
                  float* dwr = dw + static_cast<std::size_t>(ic) * k * k * co2 + wbase;
                  axpy_span(dwr, x[xoff + ic], dyrow, co2);
                }
              }
            }
          }
          if (want_dx) axpy_span(dx + xoff, 1.0f, acc.data(), ci2);
        }
      }
    }
  };

  Tensor4 out = make_result(yd, {&input, &weights, &bias}, backprop);

  const float* x = xn->data.data();
  const float* w = wn->data.data();
  const float* bv = bn->data.data();
  float* y = out.node()->data.data();
  // Seed with the bias, then scatter-add every input pixel through the kernel.
  for (std::size_t i = 0, n = yd.count() / co; i < n; ++i)
    for (int oc = 0; oc < co; ++oc) y[i * co + oc] = bv[oc];
  for (int b = 0; b < xd.b; ++b) {
    for (int iy = 0; iy < xd.h; ++iy) {
      for (int ix = 0; ix < xd.w; ++ix) {
        const float* xrow = x + ((static_cast<std::size_t>(b) * xd.h + iy) * xd.w + ix) * ci;
        for (int ky = 0; ky < k; ++ky) {
          const int oy = iy * s - p + ky;
          if (oy < 0 || oy >= oh) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ox = ix * s - p + kx;
            if (ox < 0 || ox >= ow) continue;
            float* yrow = y + ((static_cast<std::size_t>(b) * oh + oy) * ow + ox) * co;
            const std::size_t wbase = (static_cast<std::size_t>(ky) * k + kx) * co;
            for (int ic = 0; ic < ci; ++ic) {
              const float v = xrow[ic];
              if (v == 0.0f) continue;
              axpy_span(yrow, v, w + static_cast<std::size_t>(ic) * k * k * co + wbase, co);
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor4 instance_norm(const Tensor4& input, const Tensor4& gamma, const Tensor4& beta,
                      float eps) {
  const Dims4 xd = input.dims();
  require(gamma.dims() == Dims4{1, 1, 1, xd.c} && beta.dims() == Dims4{1, 1, 1, xd.c},
          "instance_norm: gamma/beta dims must be (1,1,1,channels)");
  require(eps >= 0.0f, "instance_norm: eps must be >= 0");
  const std::size_t plane = static_cast<std::size_t>(xd.h) * xd.w;
  require(plane > 1 || eps > 0.0f,
          "instance_norm: 1x1 spatial plane requires eps > 0");

  const NodePtr xn = input.node_ptr(), gn = gamma.node_ptr(), bn = beta.node_ptr();

  // Per (sample, channel) statistics, shared with the backward pass.
  auto mu = std::make_shared<std::vector<float>>(static_cast<std::size_t>(xd.b) * xd.c);
  auto inv_std = std::make_shared<std::vector<float>>(static_cast<std::size_t>(xd.b) * xd.c);

  auto backprop = [xn, gn, bn, mu, inv_std](TensorNode& self) {
    const Dims4 xd2 = xn->dims;
    const int c = xd2.c;
    const std::size_t plane2 = static_cast<std::size_t>(xd2.h) * xd2.w;
    const float* x = xn->data.data();
    const float* g = gn->data.data();
    const float* dy = self.grad.data();
    const bool want_dx = xn->needs_grad;
    const bool want_dg = gn->needs_grad;
    const bool want_db = bn->needs_grad;

    for (int b = 0; b < xd2.b; ++b) {
      const std::size_t base = static_cast<std::size_t>(b) * plane2 * c;
      for (int ch = 0; ch < c; ++ch) {
        const float m = (*mu)[static_cast<std::size_t>(b) * c + ch];
        const float is = (*inv_std)[static_cast<std::size_t>(b) * c + ch];
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (std::size_t i = 0; i < plane2; ++i) {
          const float d = dy[base + i * c + ch];
          sum_dy += d;
          sum_dy_xhat += d * (x[base + i * c + ch] - m) * is;
        }
        if (want_dg) gn->grad[ch] += static_cast<float>(sum_dy_xhat);
        if (want_db) bn->grad[ch] += static_cast<float>(sum_dy);
        if (want_dx) {
          const float mean_dy = static_cast<float>(sum_dy / static_cast<double>(plane2));
          const float mean_dy_xhat =
              static_cast<float>(sum_dy_xhat / static_cast<double>(plane2));
          const float scale = g[ch] * is;
          for (std::size_t i = 0; i < plane2; ++i) {
            const float xhat = (x[base + i * c + ch] - m) * is;
            xn->grad[base + i * c + ch] +=
                scale * (dy[base + i * c + ch] - mean_dy - xhat * mean_dy_xhat);
          }
        }
      }
    }
  };

  Tensor4 out = make_result(xd, {&input, &gamma, &beta}, backprop);

  const float* x = xn->data.data();
  const float* g = gn->data.data();
  const float* be = bn->data.data();
  float* y = out.node()->data.data();
  for (int b = 0; b < xd.b; ++b) {
    const std::size_t base = static_cast<std::size_t>(b) * plane * xd.c;
    for (int ch = 0; ch < xd.c; ++ch) {
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t i = 0; i < plane; ++i) {
        const double v = x[base + i * xd.c + ch];
        sum += v;
        sum_sq += v * v;
      }
      const double m = sum / static_cast<double>(plane);
      const double var = std::max(0.0, sum_sq / static_cast<double>(plane) - m * m);
      const float is = static_cast<float>(1.0 / std::sqrt(var + eps));
      (*mu)[static_cast<std::size_t>(b) * xd.c + ch] = static_cast<float>(m);
      (*inv_std)[static_cast<std::size_t>(b) * xd.c + ch] = is;
      for (std::size_t i = 0; i < plane; ++i) {
        const float xhat = (x[base + i * xd.c + ch] - static_cast<float>(m)) * is;
        y[base + i * xd.c + ch] = g[ch] * xhat + be[ch];
      }
    }
  }
  return out;
}

Tensor4 leaky_relu(const Tensor4& input, float alpha) {
  require(alpha > 0.0f && alpha < 1.0f, "leaky_relu: alpha must be in (0,1)");
  const NodePtr xn = input.node_ptr();
  auto backprop = [xn, alpha](TensorNode& self) {
    if (!xn->needs_grad) return;
    const float* x = xn->data.data();
    const float* dy = self.grad.data();
    float* dx = xn->grad.data();
    const std::size_t n = self.dims.count();
    for (std::size_t i = 0; i < n; ++i) dx[i] += dy[i] * (x[i] > 0.0f ? 1.0f : alpha);
  };
  Tensor4 out = make_result(input.dims(), {&input}, backprop);
  const float* x = xn->data.data();
  float* y = out.node()->data.data();
  const std::size_t n = input.size();
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : alpha * x[i];
  return out;
}

Tensor4 relu(const Tensor4& input) {
  const NodePtr xn = input.node_ptr();
  auto backprop = [xn](TensorNode& self) {
    if (!xn->needs_grad) return;
    const float* x = xn->data.data();
    const float* dy = self.grad.data();
    float* dx = xn->grad.data();
    const std::size_t n = self.dims.count();
    for (std::size_t i = 0; i < n; ++i) dx[i] += x[i] > 0.0f ? dy[i] : 0.0f;
  };
  Tensor4 out = make_result(input.dims(), {&input}, backprop);
  const float* x = xn->data.data();
  float* y = out.node()->data.data();
  const std::size_t n = input.size();
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
  return out;
}

Tensor4 tanh(const Tensor4& input) {
  const NodePtr xn = input.node_ptr();
  auto backprop = [xn](TensorNode& self) {
    if (!xn->needs_grad) return;
    const float* y = self.data.data();
    const float* dy = self.grad.data();
    float* dx = xn->grad.data();
    const std::size_t n = self.dims.count();
    for (std::size_t i = 0; i < n; ++i) dx[i] += dy[i] * (1.0f - y[i] * y[i]);
  };
  Tensor4 out = make_result(input.dims(), {&input}, backprop);
  const float* x = xn->data.data();
  float* y = out.node()->data.data();
  const std::size_t n = input.size();
  for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
  return out;
}

Tensor4 add(const Tensor4& a, const Tensor4& b) {
  require(a.dims() == b.dims(), "add: shape mismatch");
  const NodePtr an = a.node_ptr(), bn = b.node_ptr();
  auto backprop = [an, bn](TensorNode& self) {
    const float* dy = self.grad.data();
    const std::size_t n = self.dims.count();
    if (an->needs_grad) {
      float* da = an->grad.data();
      for (std::size_t i = 0; i < n; ++i) da[i] += dy[i];
    }
    if (bn->needs_grad) {
      float* db = bn->grad.data();
      for (std::size_t i = 0; i < n; ++i) db[i] += dy[i];
    }
  };
  Tensor4 out = make_result(a.dims(), {&a, &b}, backprop);
  const float* av = an->data.data();
  const float* bv = bn->data.data();
  float* y = out.node()->data.data();
  for (std::size_t i = 0, n = a.size(); i < n; ++i) y[i] = av[i] + bv[i];
  return out;
}

Tensor4 sub(const Tensor4& a, const Tensor4& b) {
  require(a.dims() == b.dims(), "sub: shape mismatch");
  const NodePtr an = a.node_ptr(), bn = b.node_ptr();
  auto backprop = [an, bn](TensorNode& self) {
    const float* dy = self.grad.data();
    const std::size_t n = self.dims.count();
    if (an->needs_grad) {
      float* da = an->grad.data();
      for (std::size_t i = 0; i < n; ++i) da[i] += dy[i];
    }
    if (bn->needs_grad) {
      float* db = bn->grad.data();
      for (std::size_t i = 0; i < n; ++i) db[i] -= dy[i];
    }
  };
  Tensor4 out = make_result(a.dims(), {&a, &b}, backprop);
  const float* av = an->data.data();
  const float* bv = bn->data.data();
  float* y = out.node()->data.data();
  for (std::size_t i = 0, n = a.size(); i < n; ++i) y[i] = av[i] - bv[i];
  return out;
}

Tensor4 add_scalar(const Tensor4& a, float s) {
  const NodePtr an = a.node_ptr();
  auto backprop = [an](TensorNode& self) {
    if (!an->needs_grad) return;
    const float* dy = self.grad.data();
    float* da = an->grad.data();
    for (std::size_t i = 0, n = self.dims.count(); i < n; ++i) da[i] += dy[i];
  };
  Tensor4 out = make_result(a.dims(), {&a}, backprop);
  const float* av = an->data.data();
  float* y = out.node()->data.data();
  for (std::size_t i = 0, n = a.size(); i < n; ++i) y[i] = av[i] + s;
  return out;
}

Tensor4 mul_scalar(const Tensor4& a, float s) {
  const NodePtr an = a.node_ptr();
  auto backprop = [an, s](TensorNode& self) {
    if (!an->needs_grad) return;
    const float* dy = self.grad.data();
    float* da = an->grad.data();
    for (std::size_t i = 0, n = self.dims.count(); i < n; ++i) da[i] += s * dy[i];
  };
  Tensor4 out = make_result(a.dims(), {&a}, backprop);
  const float* av = an->data.data();
  float* y = out.node()->data.data();
  for (std::size_t i = 0, n = a.size(); i < n; ++i) y[i] = av[i] * s;
  return out;
}

Tensor4 square(const Tensor4& a) {
  const NodePtr an = a.node_ptr();
  auto backprop = [an](TensorNode& self) {
    if (!an->needs_grad) return;
    const float* x = an->data.data();
    const float* dy = self.grad.data();
    float* da = an->grad.data();
    for (std::size_t i = 0, n = self.dims.count(); i < n; ++i) da[i] += 2.0f * x[i] * dy[i];
  };
  Tensor4 out = make_result(a.dims(), {&a}, backprop);
  const float* av = an->data.data();
  float* y = out.node()->data.data();
  for (std::size_t i = 0, n = a.size(); i < n; ++i) y[i] = av[i] * av[i];
  return out;
}

Tensor4 abs(const Tensor4& a) {
  const NodePtr an = a.node_ptr();
  auto backprop = [an](TensorNode& self) {
    if (!an->needs_grad) return;
    const float* x = an->data.data();
    const float* dy = self.grad.data();
    float* da = an->grad.data();
    for (std::size_t i = 0, n = self.dims.count(); i < n; ++i) {
      if (x[i] > 0.0f)
        da[i] += dy[i];
      else if (x[i] < 0.0f)
        da[i] -= dy[i];
    }
  };
  Tensor4 out = make_result(a.dims(), {&a}, backprop);
  const float* av = an->data.data();
  float* y = out.node()->data.data();
  for (std::size_t i = 0, n = a.size(); i < n; ++i) y[i] = std::fabs(av[i]);
  return out;
}

Tensor4 sum_all(const Tensor4& a) {
  const NodePtr an = a.node_ptr();
  auto backprop = [an](TensorNode& self) {
    if (!an->needs_grad) return;
    const float g = self.grad[0];
    float* da = an->grad.data();
    for (std::size_t i = 0, n = an->dims.count(); i < n; ++i) da[i] += g;
  };
  Tensor4 out = make_result(Dims4{1, 1, 1, 1}, {&a}, backprop);
  const float* av = an->data.data();
  double acc = 0.0;
  for (std::size_t i = 0, n = a.size(); i < n; ++i) acc += av[i];
  out.node()->data[0] = static_cast<float>(acc);
  return out;
}

Tensor4 mean_all(const Tensor4& a) {
  const NodePtr an = a.node_ptr();
  const double inv_n = 1.0 / static_cast<double>(a.size());
  auto backprop = [an, inv_n](TensorNode& self) {
    if (!an->needs_grad) return;
    const float g = static_cast<float>(self.grad[0] * inv_n);
    float* da = an->grad.data();
    for (std::size_t i = 0, n = an->dims.count(); i < n; ++i) da[i] += g;
  };
  Tensor4 out = make_result(Dims4{1, 1, 1, 1}, {&a}, backprop);
  const float* av = an->data.data();
  double acc = 0.0;
  for (std::size_t i = 0, n = a.size(); i < n; ++i) acc += av[i];
  out.node()->data[0] = static_cast<float>(acc * inv_n);
  return out;
}

Tensor4 residual_block(const Tensor4& input, const ResidualParams& params) {
  require(params.conv1_w.dims().b == input.dims().c &&
              params.conv2_w.dims().b == input.dims().c &&
              params.conv1_w.dims().c == input.dims().c,
          "residual_block: in/out channels must match the input");
  const int k = params.conv1_w.dims().h;
  const int pad = k / 2;
  Tensor4 h = conv2d(input, params.conv1_w, params.conv1_b, 1, pad);
  h = instance_norm(h, params.gamma1, params.beta1, params.eps);
  h = relu(h);
  h = conv2d(h, params.conv2_w, params.conv2_b, 1, params.conv2_w.dims().h / 2);
  h = instance_norm(h, params.gamma2, params.beta2, params.eps);
  return add(input, h);
}

}  // namespace tilegan
