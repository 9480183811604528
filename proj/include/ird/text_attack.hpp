#pragma once

#include <string>
#include <vector>

#include "ird/core.hpp"
#include "ird/model.hpp"

namespace ird {

/// Source of replacement words for one caption position. Returned words are
/// nonempty and differ from the original word at that position.
class CandidateSupplier {
 public:
  virtual ~CandidateSupplier() = default;
  virtual std::vector<std::string> candidates(const TokenSequence& text, std::size_t position,
                                              int limit) const = 0;
};

/// Default supplier: nearest vocabulary words by cosine over the toy
/// model's token-embedding rows, excluding the original word and the
/// unknown token. A masked-LM candidate source plugs in behind the same
/// interface.
class EmbeddingNeighborSupplier final : public CandidateSupplier {
 public:
  explicit EmbeddingNeighborSupplier(const ToyDualEncoder& model) : model_(&model) {}

  std::vector<std::string> candidates(const TokenSequence& text, std::size_t position,
                                      int limit) const override;

 private:
  const ToyDualEncoder* model_;
};

/// Everything the tri-weighted deviation objective needs: the clean image,
/// the last two attack iterates, the clean caption, and the (lambda, mu, nu)
/// weights. Weights must be a simplex point; the degenerate (0, 1, 0)
/// reproduces the deviate-from-final-iterate-only scheme.
struct TextAttackInputs {
  ImageTensor clean_image;  ///< v
  ImageTensor adv_final;    ///< v'_T
  ImageTensor adv_prev;     ///< v'_{T-1}
  TokenSequence clean_text;
  double lambda_w = 0.6;
  double mu_w = 0.2;
  double nu_w = 0.2;

  void validate() const;
};

/// lambda*J(v, t') + mu*J(v'_T, t') + nu*J(v'_{T-1}, t') with the three
/// image embeddings computed once and cached across candidate evaluations.
class TextObjective {
 public:
  TextObjective(const EncoderModel& model, const TextAttackInputs& inputs);

  double operator()(const TokenSequence& candidate) const;

 private:
  const EncoderModel* model_;
  double lambda_, mu_, nu_;
  Embedding clean_, final_, prev_;
};

double text_objective(const EncoderModel& model, const TextAttackInputs& inputs,
                      const TokenSequence& candidate);

/// Positions sorted by descending objective gain when the word is replaced
/// by the unknown token; ties by lowest position.
std::vector<std::size_t> rank_word_importance(const EncoderModel& model,
                                              const TextAttackInputs& inputs);

struct TextAttackResult {
  TokenSequence adversarial;
  std::vector<std::size_t> substituted_positions;
  double objective_before = 0.0;
  double objective_after = 0.0;
};

/// Greedy word substitution under the xi_t budget: each round scans the
/// remaining positions in importance order, evaluates up to W supplier
/// candidates per position, and commits the single best substitution if it
/// strictly improves the objective. With xi_t = 1 this equals brute force
/// over all (position, candidate) pairs.
TextAttackResult attack_text(const EncoderModel& model, const TextAttackInputs& inputs,
                             const CandidateSupplier& supplier, const PerturbationBudget& budget,
                             int word_list_W);

}  // namespace ird
