#include "ird/resize.hpp"

#include <algorithm>
#include <cmath>

namespace ird {

BilinearResizer::BilinearResizer(ImageShape from, ImageShape to) : from_(from), to_(to) {
  if (!from_.valid() || !to_.valid()) {
    throw std::invalid_argument("BilinearResizer: non-positive shape");
  }
  if (from_.channels != to_.channels) {
    throw std::invalid_argument("BilinearResizer: channel count must match");
  }
  identity_ = (from_ == to_);
  if (!identity_) {
    rows_ = make_taps(from_.height, to_.height);
    cols_ = make_taps(from_.width, to_.width);
  }
}

std::vector<BilinearResizer::AxisTap> BilinearResizer::make_taps(int n_in, int n_out) {
  std::vector<AxisTap> taps(static_cast<std::size_t>(n_out));
  const double ratio = static_cast<double>(n_in) / static_cast<double>(n_out);
  for (int i = 0; i < n_out; ++i) {
    double c = (static_cast<double>(i) + 0.5) * ratio - 0.5;
    c = std::clamp(c, 0.0, static_cast<double>(n_in - 1));
    const int lo = static_cast<int>(std::floor(c));
    const double frac = c - static_cast<double>(lo);
    AxisTap t;
    t.lo = lo;
    t.hi = std::min(lo + 1, n_in - 1);
    t.w_lo = 1.0 - frac;
    t.w_hi = frac;
    if (t.hi == t.lo) {
      t.w_lo = 1.0;
      t.w_hi = 0.0;
    }
    taps[static_cast<std::size_t>(i)] = t;
  }
  return taps;
}

ImageTensor BilinearResizer::forward(const ImageTensor& image) const {
  if (image.shape() != from_) {
    throw std::invalid_argument("BilinearResizer::forward: unexpected input shape");
  }
  if (identity_) return image;

  const auto& in = image.pixels();
  std::vector<double> out(to_.pixel_count());
  const int ch = to_.channels;
  const int in_w = from_.width;
  for (int y = 0; y < to_.height; ++y) {
    const AxisTap& ry = rows_[static_cast<std::size_t>(y)];
    for (int x = 0; x < to_.width; ++x) {
      const AxisTap& rx = cols_[static_cast<std::size_t>(x)];
      for (int c = 0; c < ch; ++c) {
        const double p00 = in[(static_cast<std::size_t>(ry.lo) * in_w + rx.lo) * ch + c];
        const double p01 = in[(static_cast<std::size_t>(ry.lo) * in_w + rx.hi) * ch + c];
        const double p10 = in[(static_cast<std::size_t>(ry.hi) * in_w + rx.lo) * ch + c];
        const double p11 = in[(static_cast<std::size_t>(ry.hi) * in_w + rx.hi) * ch + c];
        double value = ry.w_lo * rx.w_lo * p00 + ry.w_lo * rx.w_hi * p01 +
                       ry.w_hi * rx.w_lo * p10 + ry.w_hi * rx.w_hi * p11;
        const double lo = std::min({p00, p01, p10, p11});
        const double hi = std::max({p00, p01, p10, p11});
        value = std::clamp(value, lo, hi);
        out[(static_cast<std::size_t>(y) * to_.width + x) * ch + c] = value;
      }
    }
  }
  return ImageTensor(to_, std::move(out));
}

std::vector<double> BilinearResizer::transpose(const std::vector<double>& grad_at_output) const {
  if (grad_at_output.size() != to_.pixel_count()) {
    throw std::invalid_argument("BilinearResizer::transpose: unexpected gradient size");
  }
  if (identity_) return grad_at_output;

  std::vector<double> out(from_.pixel_count(), 0.0);
  const int ch = to_.channels;
  const int in_w = from_.width;
  for (int y = 0; y < to_.height; ++y) {
    const AxisTap& ry = rows_[static_cast<std::size_t>(y)];
    for (int x = 0; x < to_.width; ++x) {
      const AxisTap& rx = cols_[static_cast<std::size_t>(x)];
      for (int c = 0; c < ch; ++c) {
        const double g = grad_at_output[(static_cast<std::size_t>(y) * to_.width + x) * ch + c];
        out[(static_cast<std::size_t>(ry.lo) * in_w + rx.lo) * ch + c] += ry.w_lo * rx.w_lo * g;
        if (rx.hi != rx.lo) {
          out[(static_cast<std::size_t>(ry.lo) * in_w + rx.hi) * ch + c] += ry.w_lo * rx.w_hi * g;
        }
        if (ry.hi != ry.lo) {
          out[(static_cast<std::size_t>(ry.hi) * in_w + rx.lo) * ch + c] += ry.w_hi * rx.w_lo * g;
          if (rx.hi != rx.lo) {
            out[(static_cast<std::size_t>(ry.hi) * in_w + rx.hi) * ch + c] += ry.w_hi * rx.w_hi * g;
          }
        }
      }
    }
  }
  return out;
}

ImageShape scaled_shape(const ImageShape& shape, double scale) {
  if (!(scale > 0.0)) {
    throw std::invalid_argument("scaled_shape: scale must be > 0");
  }
  ImageShape out = shape;
  out.height = static_cast<int>(std::llround(scale * shape.height));
  out.width = static_cast<int>(std::llround(scale * shape.width));
  if (out.height <= 0 || out.width <= 0) {
    throw std::invalid_argument("scaled_shape: scale yields an empty image");
  }
  return out;
}

}  // namespace ird
