#pragma once

#include <string>
#include <vector>

#include "ird/core.hpp"
#include "ird/dataset.hpp"
#include "ird/model.hpp"

namespace ird::testing {

inline Vocabulary tiny_vocabulary() {
  return Vocabulary({"<unk>", "red", "green", "blue", "circle", "square", "triangle", "top",
                     "bottom", "left", "right", "a", "the", "is", "in"});
}

inline ToyDualEncoder make_toy_model(std::uint64_t seed, const std::string& family = "vit",
                                     int hidden = 24, int embed = 12, int token_dim = 8) {
  ToyArchitecture arch;
  arch.stem = family == "vit" ? StemKind::PatchPool : StemKind::StridedAvg;
  arch.hidden = hidden;
  arch.embed_dim = embed;
  arch.token_dim = token_dim;
  return ToyDualEncoder(arch, tiny_vocabulary(), arch.tag() + "@t" + std::to_string(seed),
                        RngStream(seed, "test-model"));
}

inline ImageTensor random_image(ImageShape shape, RngStream& rng) {
  std::vector<double> pixels(shape.pixel_count());
  for (auto& p : pixels) p = rng.uniform();
  return ImageTensor(shape, std::move(pixels));
}

inline TokenSequence random_caption(const Vocabulary& vocab, RngStream& rng,
                                    std::size_t min_len = 3, std::size_t max_len = 8) {
  const std::size_t len = min_len + rng.index(max_len - min_len + 1);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < len; ++i) {
    words.push_back(vocab.word(1 + rng.index(vocab.size() - 1)));
  }
  return TokenSequence(std::move(words));
}

}  // namespace ird::testing
