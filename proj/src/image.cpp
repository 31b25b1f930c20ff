#include "tilegan/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tilegan {

void validate_crop(const ImageBuffer& img, const CropSpec& spec) {
  if (spec.w < 1 || spec.h < 1)
    throw std::invalid_argument("crop: extent must be >= 1");
  if (spec.x0 < 0 || spec.y0 < 0 || spec.x0 + spec.w > img.width ||
      spec.y0 + spec.h > img.height)
    throw std::invalid_argument("crop: spec out of bounds");
}

ImageBuffer crop(const ImageBuffer& img, const CropSpec& spec) {
  validate_crop(img, spec);
  ImageBuffer out(spec.w, spec.h);
  for (int y = 0; y < spec.h; ++y) {
    const int sy = spec.y0 + (spec.flip_v ? spec.h - 1 - y : y);
    for (int x = 0; x < spec.w; ++x) {
      const int sx = spec.x0 + (spec.flip_h ? spec.w - 1 - x : x);
      const std::uint8_t* src =
          &img.pixels[(static_cast<std::size_t>(sy) * img.width + sx) * 3];
      std::uint8_t* dst = &out.pixels[(static_cast<std::size_t>(y) * spec.w + x) * 3];
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
    }
  }
  return out;
}

namespace {

struct SamplePoint {
  int lo;
  int hi;
  float frac;
};

// Half-pixel-center source coordinate for destination index d.
SamplePoint sample_point(int d, int src_n, int dst_n) {
  const double pos = (d + 0.5) * (static_cast<double>(src_n) / dst_n) - 0.5;
  double lo = std::floor(pos);
  double frac = pos - lo;
  int ilo = static_cast<int>(lo);
  int ihi = ilo + 1;
  if (ilo < 0) {
    ilo = 0;
    ihi = 0;
    frac = 0.0;
  } else if (ihi >= src_n) {
    ilo = src_n - 1;
    ihi = src_n - 1;
    frac = 0.0;
  }
  return {ilo, ihi, static_cast<float>(frac)};
}

}  // namespace

std::vector<float> resize_bilinear_f32(const float* src, int src_w, int src_h, int ch,
                                       int target_w, int target_h) {
  std::vector<float> out(static_cast<std::size_t>(target_w) * target_h * ch);
  std::vector<SamplePoint> xs(target_w);
  for (int x = 0; x < target_w; ++x) xs[x] = sample_point(x, src_w, target_w);
  for (int y = 0; y < target_h; ++y) {
    const SamplePoint sy = sample_point(y, src_h, target_h);
    const float* row_lo = src + static_cast<std::size_t>(sy.lo) * src_w * ch;
    const float* row_hi = src + static_cast<std::size_t>(sy.hi) * src_w * ch;
    float* dst = out.data() + static_cast<std::size_t>(y) * target_w * ch;
    for (int x = 0; x < target_w; ++x) {
      const SamplePoint& sx = xs[x];
      for (int c = 0; c < ch; ++c) {
        const float tl = row_lo[static_cast<std::size_t>(sx.lo) * ch + c];
        const float tr = row_lo[static_cast<std::size_t>(sx.hi) * ch + c];
        const float bl = row_hi[static_cast<std::size_t>(sx.lo) * ch + c];
        const float br = row_hi[static_cast<std::size_t>(sx.hi) * ch + c];
        const float top = tl + (tr - tl) * sx.frac;
        const float bot = bl + (br - bl) * sx.frac;
        dst[static_cast<std::size_t>(x) * ch + c] = top + (bot - top) * sy.frac;
      }
    }
  }
  return out;
}

namespace {

// Shared kernel for rescale/crop_and_rescale: bilinear sampling over a source
// window with optional mirroring. Coordinates are resolved in the window's
// own frame, so it is exactly rescale(crop(...)).
ImageBuffer sample_window(const ImageBuffer& img, const CropSpec& spec, int tw, int th) {
  ImageBuffer out(tw, th);
  std::vector<SamplePoint> xs(tw);
  for (int x = 0; x < tw; ++x) xs[x] = sample_point(x, spec.w, tw);
  auto src_x = [&](int wx) { return spec.x0 + (spec.flip_h ? spec.w - 1 - wx : wx); };
  auto src_y = [&](int wy) { return spec.y0 + (spec.flip_v ? spec.h - 1 - wy : wy); };
  for (int y = 0; y < th; ++y) {
    const SamplePoint sy = sample_point(y, spec.h, th);
    const int ylo = src_y(sy.lo), yhi = src_y(sy.hi);
    for (int x = 0; x < tw; ++x) {
      const SamplePoint& sx = xs[x];
      const int xlo = src_x(sx.lo), xhi = src_x(sx.hi);
      for (int c = 0; c < 3; ++c) {
        const float tl = img.at(xlo, ylo, c);
        const float tr = img.at(xhi, ylo, c);
        const float bl = img.at(xlo, yhi, c);
        const float br = img.at(xhi, yhi, c);
        const float top = tl + (tr - tl) * sx.frac;
        const float bot = bl + (br - bl) * sx.frac;
        const float v = top + (bot - top) * sy.frac;
        out.set(x, y, c, static_cast<std::uint8_t>(std::lround(v)));
      }
    }
  }
  return out;
}

}  // namespace

ImageBuffer rescale(const ImageBuffer& img, int target_w, int target_h) {
  if (target_w < 1 || target_h < 1)
    throw std::invalid_argument("rescale: target dims must be >= 1");
  if (target_w == img.width && target_h == img.height) return img;
  return sample_window(img, CropSpec{0, 0, img.width, img.height, false, false}, target_w,
                       target_h);
}

ImageBuffer crop_and_rescale(const ImageBuffer& img, const CropSpec& spec, int target_w,
                             int target_h) {
  validate_crop(img, spec);
  if (target_w < 1 || target_h < 1)
    throw std::invalid_argument("crop_and_rescale: target dims must be >= 1");
  if (target_w == spec.w && target_h == spec.h && !spec.flip_h && !spec.flip_v &&
      spec.x0 == 0 && spec.y0 == 0 && spec.w == img.width && spec.h == img.height)
    return img;
  return sample_window(img, spec, target_w, target_h);
}

void to_tensor_into(const ImageBuffer& img, std::span<float> dst) {
  const std::size_t n = img.pixels.size();
  if (dst.size() != n) throw std::invalid_argument("to_tensor_into: size mismatch");
  for (std::size_t i = 0; i < n; ++i)
    dst[i] = static_cast<float>(img.pixels[i]) / 127.5f - 1.0f;
}

Tensor4 to_tensor(const ImageBuffer& img) {
  Tensor4 t = Tensor4::zeros(Dims4{1, img.height, img.width, 3});
  to_tensor_into(img, t.values());
  return t;
}

std::uint8_t float_to_pixel(float v) {
  const double clamped = std::clamp(static_cast<double>(v), -1.0, 1.0);
  return static_cast<std::uint8_t>(std::lround((clamped + 1.0) * 127.5));
}

ImageBuffer from_tensor(const Tensor4& t) {
  const Dims4 d = t.dims();
  if (d.b != 1 || d.c != 3)
    throw std::invalid_argument("from_tensor: tensor must be 1 x h x w x 3");
  ImageBuffer img(d.w, d.h);
  const auto src = t.data();
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = float_to_pixel(src[i]);
  return img;
}

}  // namespace tilegan
