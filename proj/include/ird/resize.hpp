#pragma once

#include <vector>

#include "ird/core.hpp"

namespace ird {

/// Bilinear resize with the align-corners-false coordinate convention:
/// source coordinate of output index i is (i + 0.5) * (n_in / n_out) - 0.5,
/// clamped to the source range. The map is a fixed linear operator per
/// (input shape, output shape) pair; transpose() applies its exact adjoint,
/// which is what pulls gradients at a resized image back to full resolution.
///
/// forward() additionally clamps each output pixel to the [min, max] hull of
/// its (at most four) source taps. Mathematically a no-op, it keeps convex
/// combinations of in-range pixels in range despite float rounding; the
/// deviation from the pure linear map is at most one ulp. Equal shapes are
/// an exact copy.
class BilinearResizer {
 public:
  BilinearResizer(ImageShape from, ImageShape to);

  const ImageShape& from() const { return from_; }
  const ImageShape& to() const { return to_; }

  ImageTensor forward(const ImageTensor& image) const;
  /// Adjoint of the (unclamped) linear map: scatter-add of tap weights.
  std::vector<double> transpose(const std::vector<double>& grad_at_output) const;

 private:
  struct AxisTap {
    int lo = 0;
    int hi = 0;
    double w_lo = 1.0;
    double w_hi = 0.0;
  };

  static std::vector<AxisTap> make_taps(int n_in, int n_out);

  ImageShape from_{};
  ImageShape to_{};
  bool identity_ = false;
  std::vector<AxisTap> rows_{};
  std::vector<AxisTap> cols_{};
};

/// Output shape for a uniform scale: round(scale * extent) per spatial axis.
/// Throws std::invalid_argument if either rounded extent is zero.
ImageShape scaled_shape(const ImageShape& shape, double scale);

}  // namespace ird
