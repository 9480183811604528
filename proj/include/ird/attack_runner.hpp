#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ird/dataset.hpp"
#include "ird/image_attack.hpp"
#include "ird/text_attack.hpp"

namespace ird {

/// One gallery entry on the clean side.
struct EvalExample {
  std::string example_id;
  ImageTensor image;
  std::vector<TokenSequence> captions;
};

/// The adversarial side of a gallery entry, aligned by example_id.
struct AttackedExample {
  std::string example_id;
  ImageTensor adv_image;
  int attacked_caption = 0;
  std::optional<TokenSequence> adv_caption;
};

std::vector<EvalExample> to_eval_examples(const std::vector<const ManifestEntry*>& entries);
std::vector<AttackedExample> to_attacked_examples(const std::vector<AdversarialRecord>& records);

/// Full per-example attack: the image attack first, then (for SGA/IRD with
/// xi_t > 0) the word-substitution attack against the final triangle
/// (v, v'_{T-1}, v'_T). PGD is the image-only baseline. Caption 0 is the
/// attacked caption; the rest join the image objective when
/// config.use_caption_set is set. When no supplier is given, the default
/// embedding-neighbor supplier is built from the surrogate.
AdversarialRecord attack_example(const EncoderModel& surrogate, const EvalExample& example,
                                 const AttackConfig& config,
                                 const CandidateSupplier* supplier = nullptr);

/// Attacks every example; examples are independent, so `jobs` > 1 runs them
/// in a small thread pool with results kept in input order.
std::vector<AdversarialRecord> attack_examples(const EncoderModel& surrogate,
                                               const std::vector<EvalExample>& examples,
                                               const AttackConfig& config, int jobs = 1,
                                               const CandidateSupplier* supplier = nullptr);

}  // namespace ird
