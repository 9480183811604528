#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "ird/core.hpp"
#include "ird/resize.hpp"

using namespace ird;

namespace {

// Independent dense realization of the align-corners-false bilinear map,
// built coordinate by coordinate from the closed-form weights.
std::vector<std::vector<double>> dense_bilinear_matrix(ImageShape from, ImageShape to) {
  const std::size_t rows = to.pixel_count();
  const std::size_t cols = from.pixel_count();
  std::vector<std::vector<double>> m(rows, std::vector<double>(cols, 0.0));
  auto axis = [](int i_out, int n_in, int n_out) {
    double c = (i_out + 0.5) * (static_cast<double>(n_in) / n_out) - 0.5;
    c = std::clamp(c, 0.0, static_cast<double>(n_in - 1));
    const int lo = static_cast<int>(std::floor(c));
    const int hi = std::min(lo + 1, n_in - 1);
    const double f = c - lo;
    return std::tuple<int, int, double, double>(lo, hi, hi == lo ? 1.0 : 1.0 - f,
                                                hi == lo ? 0.0 : f);
  };
  for (int y = 0; y < to.height; ++y) {
    const auto [ylo, yhi, wy0, wy1] = axis(y, from.height, to.height);
    for (int x = 0; x < to.width; ++x) {
      const auto [xlo, xhi, wx0, wx1] = axis(x, from.width, to.width);
      for (int c = 0; c < to.channels; ++c) {
        const std::size_t row = (static_cast<std::size_t>(y) * to.width + x) * to.channels + c;
        auto src = [&](int yy, int xx) {
          return (static_cast<std::size_t>(yy) * from.width + xx) * from.channels + c;
        };
        m[row][src(ylo, xlo)] += wy0 * wx0;
        m[row][src(ylo, xhi)] += wy0 * wx1;
        m[row][src(yhi, xlo)] += wy1 * wx0;
        m[row][src(yhi, xhi)] += wy1 * wx1;
      }
    }
  }
  return m;
}

ImageTensor random_image(ImageShape shape, RngStream& rng) {
  std::vector<double> pixels(shape.pixel_count());
  for (auto& p : pixels) p = rng.uniform();
  return ImageTensor(shape, std::move(pixels));
}

}  // namespace

TEST_SUITE_BEGIN("resize");

TEST_CASE("scale 1.0 is an exact copy") {
  RngStream rng(2, "resize-id");
  const ImageTensor img = random_image({16, 16, 3}, rng);
  const BilinearResizer resizer(img.shape(), img.shape());
  CHECK(resizer.forward(img) == img);
  std::vector<double> g(img.size());
  for (auto& x : g) x = rng.uniform(-1.0, 1.0);
  CHECK(resizer.transpose(g) == g);
}

TEST_CASE("constant images stay constant under any scale") {
  for (double scale : {0.5, 0.75, 1.25, 2.0, 0.33}) {
    const ImageTensor img = ImageTensor::filled({16, 16, 3}, 0.63);
    const ImageShape target = scaled_shape(img.shape(), scale);
    const ImageTensor out = BilinearResizer(img.shape(), target).forward(img);
    for (double p : out.pixels()) CHECK(p == 0.63);
  }
}

TEST_CASE("2x2 to 4x4 matches the closed-form bilinear formula") {
  // Hand-computed: source coords for output i are (i+0.5)/2 - 0.5, i.e.
  // -0.25, 0.25, 0.75, 1.25 -> clamped taps (0,0,.. ) etc.
  const ImageTensor img({2, 2, 1}, {1.0, 2.0, 3.0, 4.0});
  const ImageTensor out = BilinearResizer({2, 2, 1}, {4, 4, 1}).forward(img);
  const auto m = dense_bilinear_matrix({2, 2, 1}, {4, 4, 1});
  for (std::size_t r = 0; r < m.size(); ++r) {
    double expect = 0.0;
    for (std::size_t c = 0; c < m[r].size(); ++c) expect += m[r][c] * img.pixels()[c];
    CHECK(out.pixels()[r] == doctest::Approx(expect).epsilon(1e-12));
  }
  // spot values: corners replicate the source corners
  CHECK(out.pixels()[0] == doctest::Approx(1.0));
  CHECK(out.pixels()[3] == doctest::Approx(2.0));
  CHECK(out.pixels()[12] == doctest::Approx(3.0));
  CHECK(out.pixels()[15] == doctest::Approx(4.0));
}

TEST_CASE("forward agrees with the dense matrix on random shapes") {
  RngStream rng(31, "resize-dense");
  const ImageShape shapes_from[] = {{16, 16, 3}, {8, 12, 3}, {5, 7, 1}};
  const ImageShape shapes_to[] = {{8, 8, 3}, {20, 9, 3}, {7, 7, 1}};
  for (int i = 0; i < 3; ++i) {
    const ImageTensor img = random_image(shapes_from[i], rng);
    const ImageTensor out = BilinearResizer(shapes_from[i], shapes_to[i]).forward(img);
    const auto m = dense_bilinear_matrix(shapes_from[i], shapes_to[i]);
    for (std::size_t r = 0; r < m.size(); ++r) {
      double expect = 0.0;
      for (std::size_t c = 0; c < m[r].size(); ++c) expect += m[r][c] * img.pixels()[c];
      CHECK(out.pixels()[r] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("transpose is the adjoint of the forward map") {
  // <R x, y> == <x, R^T y> for random x, y; and R^T agrees with the dense
  // matrix transpose applied row by row.
  RngStream rng(77, "resize-adjoint");
  const ImageShape from{16, 16, 3};
  const ImageShape to{11, 13, 3};
  const BilinearResizer resizer(from, to);
  const auto m = dense_bilinear_matrix(from, to);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> y(to.pixel_count());
    for (auto& v : y) v = rng.uniform(-1.0, 1.0);
    const std::vector<double> xt = resizer.transpose(y);
    for (std::size_t c = 0; c < from.pixel_count(); ++c) {
      double expect = 0.0;
      for (std::size_t r = 0; r < to.pixel_count(); ++r) expect += m[r][c] * y[r];
      CHECK(xt[c] == doctest::Approx(expect).epsilon(1e-10));
    }
  }
}

TEST_CASE("scaled_shape rounds and rejects empty outputs") {
  CHECK(scaled_shape({16, 16, 3}, 0.5) == ImageShape{8, 8, 3});
  CHECK(scaled_shape({16, 16, 3}, 0.75) == ImageShape{12, 12, 3});
  CHECK(scaled_shape({16, 16, 3}, 1.25) == ImageShape{20, 20, 3});
  CHECK_THROWS_AS(scaled_shape({16, 16, 3}, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(scaled_shape({16, 16, 3}, -1.0), std::invalid_argument);
}

TEST_SUITE_END();
