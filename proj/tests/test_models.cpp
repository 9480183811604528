#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <limits>

#include "helpers.hpp"
#include "ird/container.hpp"
#include "ird/model.hpp"

using namespace ird;
using namespace ird::testing;

namespace {

// Direct dot-product cosine, written independently of the library helper.
double cosine_oracle(const std::vector<double>& u, const std::vector<double>& w) {
  double d = 0.0, nu = 0.0, nw = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d += u[i] * w[i];
    nu += u[i] * u[i];
    nw += w[i] * w[i];
  }
  return d / (std::sqrt(nu) * std::sqrt(nw));
}

// Wrapper whose pixel gradient (the input layer's gradient) is scaled x2.
class CorruptedGradientModel final : public EncoderModel {
 public:
  explicit CorruptedGradientModel(const ToyDualEncoder& inner) : inner_(&inner) {}

  Embedding encode_image(const ImageTensor& image) const override {
    return inner_->encode_image(image);
  }
  Embedding encode_text(const TokenSequence& text) const override {
    return inner_->encode_text(text);
  }
  std::vector<double> grad_J_image(const ImageTensor& image,
                                   const TokenSequence& text) const override {
    std::vector<double> g = inner_->grad_J_image(image, text);
    for (auto& x : g) x *= 2.0;
    return g;
  }
  const std::string& model_id() const override { return id_; }
  const Vocabulary* vocabulary() const override { return inner_->vocabulary(); }

 private:
  const ToyDualEncoder* inner_;
  std::string id_ = "corrupted";
};

}  // namespace

TEST_SUITE_BEGIN("models");

TEST_CASE("loss_J bounds at parallel and orthogonal embeddings") {
  CHECK(negative_cosine(Embedding{{1.0, 0.0}}, Embedding{{2.0, 0.0}}) == doctest::Approx(-1.0));
  CHECK(negative_cosine(Embedding{{1.0, 0.0}}, Embedding{{0.0, 3.0}}) == doctest::Approx(0.0));
  CHECK(negative_cosine(Embedding{{1.0, 0.0}}, Embedding{{-1.0, 0.0}}) == doctest::Approx(1.0));
}

TEST_CASE("loss_J equals the independent cosine oracle") {
  RngStream rng(5, "cos-oracle");
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const ToyDualEncoder model = make_toy_model(seed);
    const ImageTensor v = random_image(ToyDualEncoder::kNativeShape, rng);
    const TokenSequence t = random_caption(*model.vocabulary(), rng);
    const double j = model.loss_J(v, t);
    const double oracle =
        -cosine_oracle(model.encode_image(v).values, model.encode_text(t).values);
    CHECK(j == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("unknown tokens map to the reserved embedding row") {
  const ToyDualEncoder model = make_toy_model(9);
  const TokenSequence with_unk({"zebra", "red"});
  const TokenSequence explicit_unk({"<unk>", "red"});
  const Embedding a = model.encode_text(with_unk);
  const Embedding b = model.encode_text(explicit_unk);
  CHECK(a.values == b.values);
}

TEST_CASE("gradient of a dead network is zero") {
  ToyDualEncoder model = make_toy_model(4);
  auto& first = model.image_layers().front();
  std::fill(first.weight.begin(), first.weight.end(), 0.0);
  std::fill(first.bias.begin(), first.bias.end(), 0.0);
  RngStream rng(4, "dead");
  const ImageTensor v = ImageTensor::filled(ToyDualEncoder::kNativeShape, 0.0);
  const TokenSequence t = random_caption(*model.vocabulary(), rng);
  for (double g : model.grad_J_image(v, t)) CHECK(g == 0.0);
}

TEST_CASE("gradient is unchanged when the caption has an identical embedding") {
  const ToyDualEncoder model = make_toy_model(12);
  RngStream rng(12, "same-embed");
  const ImageTensor v = random_image(ToyDualEncoder::kNativeShape, rng);
  const TokenSequence a({"zebra", "red"});   // zebra -> <unk>
  const TokenSequence b({"<unk>", "red"});
  CHECK(model.grad_J_image(v, a) == model.grad_J_image(v, b));
}

TEST_CASE("finite differences confirm the analytic gradient for both families") {
  for (const char* family : {"vit", "cnn"}) {
    const ToyDualEncoder model = make_toy_model(21, family);
    RngStream rng(21, std::string("fd-") + family);
    const GradCheckReport report = finite_difference_check(model, 6, 1e-4, rng);
    INFO(family, " max rel err ", report.max_rel_err);
    CHECK(report.passed);
  }
}

TEST_CASE("finite difference check flags a corrupted gradient") {
  const ToyDualEncoder model = make_toy_model(33);
  const CorruptedGradientModel corrupted(model);
  RngStream rng(33, "fd-corrupt");
  const GradCheckReport report = finite_difference_check(corrupted, 3, 1e-4, rng);
  CHECK_FALSE(report.passed);
  CHECK(report.max_rel_err > 0.1);
}

TEST_CASE("infinite tolerance always passes") {
  const ToyDualEncoder model = make_toy_model(8);
  const CorruptedGradientModel corrupted(model);
  RngStream rng(8, "fd-inf");
  const GradCheckReport report =
      finite_difference_check(corrupted, 2, std::numeric_limits<double>::infinity(), rng);
  CHECK(report.passed);
}

TEST_CASE("forward and gradient calls are bitwise deterministic") {
  const ToyDualEncoder model = make_toy_model(55);
  RngStream rng(55, "deterministic");
  const ImageTensor v = random_image({20, 24, 3}, rng);
  const TokenSequence t = random_caption(*model.vocabulary(), rng);
  CHECK(model.encode_image(v).values == model.encode_image(v).values);
  CHECK(model.loss_J(v, t) == model.loss_J(v, t));
  CHECK(model.grad_J_image(v, t) == model.grad_J_image(v, t));
}

TEST_CASE("loss is invariant under positive rescaling of the final layer") {
  const ToyDualEncoder model = make_toy_model(60);
  ToyDualEncoder scaled = model;
  for (auto& w : scaled.image_layers().back().weight) w *= 3.0;
  for (auto& b : scaled.image_layers().back().bias) b *= 3.0;
  RngStream rng(60, "cos-scale");
  for (int i = 0; i < 5; ++i) {
    const ImageTensor v = random_image(ToyDualEncoder::kNativeShape, rng);
    const TokenSequence t = random_caption(*model.vocabulary(), rng);
    CHECK(model.loss_J(v, t) == doctest::Approx(scaled.loss_J(v, t)).epsilon(1e-9));
  }
}

TEST_CASE("architecture tags round trip") {
  for (const char* tag : {"vit-h64-e32-t16", "cnn-h24-e12-t8"}) {
    CHECK(ToyArchitecture::parse(tag).tag() == tag);
  }
  CHECK_THROWS_AS(ToyArchitecture::parse("mlp-h3-e2"), std::invalid_argument);
}

TEST_CASE("checkpoint save/load round trips bit-exactly") {
  const ToyDualEncoder model = make_toy_model(71, "cnn");
  const auto path = std::filesystem::temp_directory_path() / "ird_test_model.tde";
  save_model(model, path);
  const ToyDualEncoder loaded = load_model(path, tiny_vocabulary());
  CHECK(loaded.model_id() == model.model_id());
  CHECK(loaded.token_table() == model.token_table());
  for (std::size_t i = 0; i < model.image_layers().size(); ++i) {
    CHECK(loaded.image_layers()[i].weight == model.image_layers()[i].weight);
    CHECK(loaded.image_layers()[i].bias == model.image_layers()[i].bias);
  }
  for (std::size_t i = 0; i < model.text_layers().size(); ++i) {
    CHECK(loaded.text_layers()[i].weight == model.text_layers()[i].weight);
  }
  RngStream rng(71, "roundtrip");
  const ImageTensor v = random_image(ToyDualEncoder::kNativeShape, rng);
  const TokenSequence t = random_caption(*model.vocabulary(), rng);
  CHECK(model.loss_J(v, t) == loaded.loss_J(v, t));
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint rejects a mismatched vocabulary") {
  const ToyDualEncoder model = make_toy_model(72);
  const auto path = std::filesystem::temp_directory_path() / "ird_test_model_vocab.tde";
  save_model(model, path);
  const Vocabulary other({"<unk>", "completely", "different", "words"});
  CHECK_THROWS_AS(load_model(path, other), ContainerError);
  std::filesystem::remove(path);
}

TEST_SUITE_END();
