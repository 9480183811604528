#include "ird/attack_runner.hpp"

#include <future>
#include <memory>

namespace ird {

std::vector<EvalExample> to_eval_examples(const std::vector<const ManifestEntry*>& entries) {
  std::vector<EvalExample> out;
  out.reserve(entries.size());
  for (const auto* e : entries) {
    out.push_back(EvalExample{e->example_id, e->image, e->captions});
  }
  return out;
}

std::vector<AttackedExample> to_attacked_examples(const std::vector<AdversarialRecord>& records) {
  std::vector<AttackedExample> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back(AttackedExample{r.example_id, r.adv_image, 0, r.adv_caption});
  }
  return out;
}

AdversarialRecord attack_example(const EncoderModel& surrogate, const EvalExample& example,
                                 const AttackConfig& config, const CandidateSupplier* supplier) {
  if (example.captions.empty()) {
    throw std::invalid_argument("attack_example: " + example.example_id + " has no captions");
  }
  const TokenSequence& caption = example.captions.front();
  std::vector<TokenSequence> extras;
  if (config.use_caption_set) {
    extras.assign(example.captions.begin() + 1, example.captions.end());
  }

  AdversarialRecord record =
      run_image_attack(surrogate, example.image, caption, config, example.example_id, extras);

  const bool wants_text = config.method != AttackMethod::PGD && config.budget.xi_t > 0;
  if (wants_text) {
    std::unique_ptr<EmbeddingNeighborSupplier> fallback;
    if (supplier == nullptr) {
      const auto* toy = dynamic_cast<const ToyDualEncoder*>(&surrogate);
      if (toy == nullptr) {
        throw std::invalid_argument(
            "attack_example: text attack needs a candidate supplier for this model");
      }
      fallback = std::make_unique<EmbeddingNeighborSupplier>(*toy);
      supplier = fallback.get();
    }
    TextAttackInputs inputs;
    inputs.clean_image = example.image;
    inputs.adv_final = record.adv_image;
    inputs.adv_prev = record.adv_prev_image;
    inputs.clean_text = caption;
    if (config.text_region) {
      inputs.lambda_w = config.lambda_w;
      inputs.mu_w = config.mu_w;
      inputs.nu_w = config.nu_w;
    } else {
      // deviate from the final iterate only
      inputs.lambda_w = 0.0;
      inputs.mu_w = 1.0;
      inputs.nu_w = 0.0;
    }
    const TextAttackResult text =
        attack_text(surrogate, inputs, *supplier, config.budget, config.word_list);
    record.adv_caption = text.adversarial;
    record.substituted_positions = text.substituted_positions;
    record.text_objective_before = text.objective_before;
    record.text_objective_after = text.objective_after;
  }
  return record;
}

std::vector<AdversarialRecord> attack_examples(const EncoderModel& surrogate,
                                               const std::vector<EvalExample>& examples,
                                               const AttackConfig& config, int jobs,
                                               const CandidateSupplier* supplier) {
  std::vector<AdversarialRecord> records(examples.size());
  if (jobs <= 1 || examples.size() <= 1) {
    for (std::size_t i = 0; i < examples.size(); ++i) {
      records[i] = attack_example(surrogate, examples[i], config, supplier);
    }
    return records;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= examples.size()) break;
      records[i] = attack_example(surrogate, examples[i], config, supplier);
    }
  };
  std::vector<std::future<void>> pool;
  const int workers = std::min<int>(jobs, static_cast<int>(examples.size()));
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.push_back(std::async(std::launch::async, worker));
  }
  for (auto& f : pool) f.get();
  return records;
}

}  // namespace ird
