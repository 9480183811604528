#include "ird/text_attack.hpp"

#include <algorithm>
#include <cmath>

namespace ird {

std::vector<std::string> EmbeddingNeighborSupplier::candidates(const TokenSequence& text,
                                                               std::size_t position,
                                                               int limit) const {
  if (position >= text.size()) {
    throw std::invalid_argument("EmbeddingNeighborSupplier: position out of range");
  }
  if (limit < 1) return {};
  const Vocabulary& vocab = *model_->vocabulary();
  const std::string& original = text.token(position);
  const std::size_t original_id = vocab.id_of(original);
  const int dim = model_->architecture().token_dim;
  const auto& table = model_->token_table();

  const double* query = table.data() + original_id * static_cast<std::size_t>(dim);
  double qn = 0.0;
  for (int d = 0; d < dim; ++d) qn += query[d] * query[d];
  qn = std::sqrt(qn);

  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t id = 1; id < vocab.size(); ++id) {  // skip the unknown token
    if (id == original_id || vocab.word(id) == original) continue;
    const double* row = table.data() + id * static_cast<std::size_t>(dim);
    double d = 0.0, rn = 0.0;
    for (int e = 0; e < dim; ++e) {
      d += query[e] * row[e];
      rn += row[e] * row[e];
    }
    rn = std::sqrt(rn);
    const double cos = (qn < 1e-30 || rn < 1e-30) ? 0.0 : d / (qn * rn);
    scored.emplace_back(cos, id);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  for (std::size_t k = 0; k < scored.size() && out.size() < static_cast<std::size_t>(limit); ++k) {
    out.push_back(vocab.word(scored[k].second));
  }
  return out;
}

void TextAttackInputs::validate() const {
  if (clean_text.empty()) {
    throw std::invalid_argument("TextAttackInputs: caption must have at least one token");
  }
  if (lambda_w < 0.0 || mu_w < 0.0 || nu_w < 0.0 ||
      std::abs(lambda_w + mu_w + nu_w - 1.0) > 1e-9) {
    throw std::invalid_argument(
        "TextAttackInputs: (lambda, mu, nu) must be nonnegative and sum to 1");
  }
  if (clean_image.shape() != adv_final.shape() || clean_image.shape() != adv_prev.shape()) {
    throw std::invalid_argument("TextAttackInputs: image shape mismatch");
  }
}

TextObjective::TextObjective(const EncoderModel& model, const TextAttackInputs& inputs)
    : model_(&model), lambda_(inputs.lambda_w), mu_(inputs.mu_w), nu_(inputs.nu_w) {
  inputs.validate();
  clean_ = model.encode_image(inputs.clean_image);
  final_ = model.encode_image(inputs.adv_final);
  prev_ = model.encode_image(inputs.adv_prev);
}

double TextObjective::operator()(const TokenSequence& candidate) const {
  const Embedding text = model_->encode_text(candidate);
  return lambda_ * negative_cosine(clean_, text) + mu_ * negative_cosine(final_, text) +
         nu_ * negative_cosine(prev_, text);
}

double text_objective(const EncoderModel& model, const TextAttackInputs& inputs,
                      const TokenSequence& candidate) {
  return TextObjective(model, inputs)(candidate);
}

std::vector<std::size_t> rank_word_importance(const EncoderModel& model,
                                              const TextAttackInputs& inputs) {
  const TextObjective objective(model, inputs);
  const double base = objective(inputs.clean_text);
  std::vector<std::pair<double, std::size_t>> deltas;
  deltas.reserve(inputs.clean_text.size());
  for (std::size_t pos = 0; pos < inputs.clean_text.size(); ++pos) {
    const double masked =
        objective(inputs.clean_text.with_token(pos, std::string(Vocabulary::kUnkToken)));
    deltas.emplace_back(masked - base, pos);
  }
  std::stable_sort(deltas.begin(), deltas.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::size_t> order;
  order.reserve(deltas.size());
  for (const auto& [delta, pos] : deltas) order.push_back(pos);
  return order;
}

TextAttackResult attack_text(const EncoderModel& model, const TextAttackInputs& inputs,
                             const CandidateSupplier& supplier, const PerturbationBudget& budget,
                             int word_list_W) {
  budget.validate();
  if (word_list_W < 1) {
    throw std::invalid_argument("attack_text: word list size must be >= 1");
  }
  const TextObjective objective(model, inputs);

  TextAttackResult result;
  result.adversarial = inputs.clean_text;
  result.objective_before = objective(inputs.clean_text);
  result.objective_after = result.objective_before;
  if (budget.xi_t == 0) return result;

  const std::vector<std::size_t> order = rank_word_importance(model, inputs);
  std::vector<bool> used(inputs.clean_text.size(), false);

  for (int round = 0; round < budget.xi_t; ++round) {
    bool found = false;
    double best_score = 0.0;
    std::size_t best_pos = 0;
    std::string best_word;
    for (std::size_t pos : order) {
      if (used[pos]) continue;
      const std::vector<std::string> words =
          supplier.candidates(result.adversarial, pos, word_list_W);
      for (const auto& word : words) {
        if (word.empty() || word == result.adversarial.token(pos)) continue;
        const double score = objective(result.adversarial.with_token(pos, word));
        if (!found || score > best_score) {
          found = true;
          best_score = score;
          best_pos = pos;
          best_word = word;
        }
      }
    }
    if (!found || best_score <= result.objective_after) break;
    result.adversarial = result.adversarial.with_token(best_pos, best_word);
    result.substituted_positions.push_back(best_pos);
    result.objective_after = best_score;
    used[best_pos] = true;
  }
  return result;
}

}  // namespace ird
