#include "doctest.h"

#include <cmath>

#include "ird/core.hpp"

using namespace ird;

namespace {

ImageTensor random_unit_image(ImageShape shape, RngStream& rng) {
  std::vector<double> pixels(shape.pixel_count());
  for (auto& p : pixels) p = rng.uniform();
  return ImageTensor(shape, std::move(pixels));
}

}  // namespace

TEST_SUITE_BEGIN("core");

TEST_CASE("project_linf identity when candidate equals origin") {
  RngStream rng(11, "proj-id");
  const ImageTensor v = random_unit_image({4, 5, 3}, rng);
  const PerturbationBudget budget{8.0 / 255.0, 1};
  CHECK(project_linf(v, v, budget) == v);
}

TEST_CASE("project_linf clamps to the budget shell") {
  const ImageTensor origin = ImageTensor::filled({3, 3, 3}, 0.5);
  const ImageTensor candidate = ImageTensor::filled({3, 3, 3}, 1.0);
  const PerturbationBudget budget{8.0 / 255.0, 1};
  const ImageTensor projected = project_linf(candidate, origin, budget);
  for (double p : projected.pixels()) {
    CHECK(p == doctest::Approx(0.5 + 8.0 / 255.0).epsilon(1e-15));
  }
}

TEST_CASE("project_linf pixel box dominates negative candidates") {
  const ImageTensor origin = ImageTensor::filled({2, 2, 3}, 0.0);
  const ImageTensor candidate = ImageTensor::filled({2, 2, 3}, -0.2);
  for (double xi : {0.05, 0.5, 1.0}) {
    const ImageTensor projected = project_linf(candidate, origin, PerturbationBudget{xi, 0});
    for (double p : projected.pixels()) CHECK(p == 0.0);
  }
}

TEST_CASE("project_linf rejects shape mismatch") {
  const ImageTensor a = ImageTensor::filled({2, 2, 3}, 0.1);
  const ImageTensor b = ImageTensor::filled({2, 3, 3}, 0.1);
  CHECK_THROWS_AS(project_linf(a, b, PerturbationBudget{}), std::invalid_argument);
}

TEST_CASE("project_linf is idempotent bitwise") {
  RngStream rng(3, "proj-idem");
  for (int trial = 0; trial < 200; ++trial) {
    const ImageTensor origin = random_unit_image({4, 4, 3}, rng);
    std::vector<double> raw(origin.size());
    for (auto& p : raw) p = rng.uniform(-0.5, 1.5);
    const ImageTensor candidate(origin.shape(), std::move(raw));
    const PerturbationBudget budget{rng.uniform(0.01, 0.3), 1};
    const ImageTensor once = project_linf(candidate, origin, budget);
    const ImageTensor twice = project_linf(once, origin, budget);
    REQUIRE(once == twice);
  }
}

TEST_CASE("sample_simplex points lie on the simplex") {
  RngStream rng(7, "simplex-valid");
  const auto samples = sample_simplex(500, rng);
  REQUIRE(samples.size() == 500);
  for (const auto& w : samples) {
    CHECK(w.beta >= 0.0);
    CHECK(w.gamma >= 0.0);
    CHECK(w.eta >= 0.0);
    CHECK(std::abs(w.sum() - 1.0) <= 1e-9);
  }
}

TEST_CASE("sample_simplex mean approaches the centroid") {
  // Monte-Carlo oracle: the uniform simplex has centroid (1/3, 1/3, 1/3).
  RngStream rng(123, "simplex-mean");
  const auto samples = sample_simplex(10000, rng);
  double mb = 0.0, mg = 0.0, me = 0.0;
  for (const auto& w : samples) {
    mb += w.beta;
    mg += w.gamma;
    me += w.eta;
  }
  mb /= 10000.0;
  mg /= 10000.0;
  me /= 10000.0;
  CHECK(std::abs(mb - 1.0 / 3.0) < 0.02);
  CHECK(std::abs(mg - 1.0 / 3.0) < 0.02);
  CHECK(std::abs(me - 1.0 / 3.0) < 0.02);
}

TEST_CASE("sample_simplex is deterministic per (seed, stream_key)") {
  RngStream a(99, "stream-x");
  RngStream b(99, "stream-x");
  const auto sa = sample_simplex(64, a);
  const auto sb = sample_simplex(64, b);
  for (std::size_t i = 0; i < sa.size(); ++i) {
    CHECK(sa[i].beta == sb[i].beta);
    CHECK(sa[i].gamma == sb[i].gamma);
    CHECK(sa[i].eta == sb[i].eta);
  }
  RngStream c(99, "stream-y");
  const auto sc = sample_simplex(64, c);
  bool any_diff = false;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    any_diff = any_diff || sa[i].beta != sc[i].beta;
  }
  CHECK(any_diff);
}

TEST_CASE("sample_simplex rejects n = 0") {
  RngStream rng(1, "zero");
  CHECK_THROWS_AS(sample_simplex(0, rng), std::invalid_argument);
}

TEST_CASE("blend_point vertex weights return the exact vertex") {
  RngStream rng(5, "blend-vertex");
  const ImageTensor v = random_unit_image({4, 4, 3}, rng);
  const ImageTensor p = random_unit_image({4, 4, 3}, rng);
  const ImageTensor c = random_unit_image({4, 4, 3}, rng);
  CHECK(blend_point(v, p, c, SimplexWeights{1.0, 0.0, 0.0}) == v);
  CHECK(blend_point(v, p, c, SimplexWeights{0.0, 1.0, 0.0}) == p);
  CHECK(blend_point(v, p, c, SimplexWeights{0.0, 0.0, 1.0}) == c);
}

TEST_CASE("blend_point centroid of constant images") {
  const ImageTensor v = ImageTensor::filled({3, 3, 3}, 0.1);
  const ImageTensor p = ImageTensor::filled({3, 3, 3}, 0.4);
  const ImageTensor c = ImageTensor::filled({3, 3, 3}, 0.7);
  const double third = 1.0 / 3.0;
  const ImageTensor mid = blend_point(v, p, c, SimplexWeights{third, third, 1.0 - 2 * third});
  for (double px : mid.pixels()) CHECK(px == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("blend_point rejects shape mismatch") {
  const ImageTensor a = ImageTensor::filled({2, 2, 3}, 0.5);
  const ImageTensor b = ImageTensor::filled({2, 2, 3}, 0.5);
  const ImageTensor c = ImageTensor::filled({3, 2, 3}, 0.5);
  CHECK_THROWS_AS(blend_point(a, b, c, SimplexWeights{1.0, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("blend of feasible points passes projection unchanged") {
  // Convexity preservation, including iterate-like inputs pinned exactly to
  // the budget shell where float rounding would otherwise spill over.
  RngStream rng(17, "blend-convex");
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const ImageShape shape{3, 4, 3};
    const ImageTensor v = random_unit_image(shape, rng);
    const PerturbationBudget budget{rng.uniform(0.01, 0.25), 1};
    auto feasible = [&](bool pin_to_shell) {
      std::vector<double> px(v.size());
      for (std::size_t i = 0; i < px.size(); ++i) {
        if (pin_to_shell) {
          px[i] = rng.uniform() < 0.5 ? v.pixels()[i] - budget.xi_v : v.pixels()[i] + budget.xi_v;
        } else {
          px[i] = v.pixels()[i] + rng.uniform(-budget.xi_v, budget.xi_v);
        }
      }
      return project_linf(ImageTensor(shape, std::move(px)), v, budget);
    };
    const ImageTensor prev = feasible(trial % 2 == 0);
    const ImageTensor cur = feasible(trial % 3 == 0);
    const auto w = sample_simplex(1, rng)[0];
    const ImageTensor blended = blend_point(v, prev, cur, w);
    const ImageTensor projected = project_linf(blended, v, budget);
    REQUIRE(projected == blended);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("sign convention") {
  CHECK(sign(3.5) == 1.0);
  CHECK(sign(-0.25) == -1.0);
  CHECK(sign(0.0) == 0.0);
  CHECK(sign(-0.0) == 0.0);
}

TEST_CASE("RngStream forks are independent of parent advancement") {
  RngStream parent(42, "root");
  RngStream child_before = parent.fork("sub");
  parent.next_u64();
  RngStream child_after = parent.fork("sub");
  CHECK(child_before.next_u64() == child_after.next_u64());
}

TEST_CASE("Vocabulary maps unknown words to the reserved id") {
  Vocabulary vocab({"<unk>", "red", "circle"});
  CHECK(vocab.id_of("red") == 1);
  CHECK(vocab.id_of("circle") == 2);
  CHECK(vocab.id_of("zebra") == Vocabulary::kUnkId);
  CHECK(vocab.id_of("<unk>") == Vocabulary::kUnkId);
  CHECK_THROWS_AS(Vocabulary({"red", "circle"}), std::invalid_argument);
  CHECK_THROWS_AS(Vocabulary({"<unk>", "red", "red"}), std::invalid_argument);
}

TEST_CASE("TokenSequence rejects empty tokens and supports substitution") {
  CHECK_THROWS_AS(TokenSequence({"a", ""}), std::invalid_argument);
  const TokenSequence t({"a", "red", "circle"});
  const TokenSequence u = t.with_token(1, "blue");
  CHECK(u.token(1) == "blue");
  CHECK(t.token(1) == "red");
  CHECK(hamming_distance(t, u) == 1);
}

TEST_CASE("AttackConfig validation") {
  AttackConfig config;
  CHECK_NOTHROW(config.validate());
  SUBCASE("bad weights") {
    config.lambda_w = 0.5;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  }
  SUBCASE("lambda zero with text_region requires the SGA-degenerate triple") {
    config.lambda_w = 0.0;
    config.mu_w = 1.0;
    config.nu_w = 0.0;
    CHECK_NOTHROW(config.validate());
    config.mu_w = 0.5;
    config.nu_w = 0.5;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  }
  SUBCASE("empty scale set") {
    config.scale_set.clear();
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  }
}

TEST_SUITE_END();
