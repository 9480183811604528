#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ird/attack_runner.hpp"
#include "ird/model.hpp"

namespace ird {

enum class AsrConvention { All, CorrectOnly };

std::string_view to_string(AsrConvention convention);
AsrConvention asr_convention_from_string(std::string_view name);

/// One attack-success percentage; percent is empty when the denominator is
/// zero (undefined, never reported as 0).
struct AsrValue {
  std::optional<double> percent;
  int successes = 0;
  int denominator = 0;
};

struct TextId {
  std::string example_id;
  int caption_index = 0;

  auto operator<=>(const TextId&) const = default;
};

struct RetrievalGallery {
  std::vector<std::pair<std::string, Embedding>> image_embeddings;
  std::vector<std::pair<TextId, Embedding>> text_embeddings;
};

/// Ids ordered by descending cosine similarity to the query; ties by
/// ascending id.
std::vector<std::string> rank_images(const Embedding& query, const RetrievalGallery& gallery);
std::vector<TextId> rank_texts(const Embedding& query, const RetrievalGallery& gallery);

/// Embeds the clean and attacked sides against one target model and answers
/// ASR@K queries under both denominators. Text retrieval succeeds when the
/// adversarial image no longer retrieves any of its captions in the top K;
/// image retrieval succeeds when the attacked caption no longer retrieves
/// its image among the (attacked) gallery images.
class RetrievalEvaluation {
 public:
  RetrievalEvaluation(const EncoderModel& target, const std::vector<EvalExample>& gallery,
                      const std::vector<AttackedExample>& attacked);

  struct Asr {
    AsrValue tr;
    AsrValue ir;
  };
  Asr asr_at_k(int k, AsrConvention convention) const;

  int num_examples() const { return static_cast<int>(order_.size()); }

 private:
  // per example, full retrieval orderings (indices into the example list)
  std::vector<std::size_t> order_;
  std::vector<std::vector<std::size_t>> tr_pre_rank_, tr_post_rank_;  // text indices
  std::vector<std::vector<std::size_t>> ir_pre_rank_, ir_post_rank_;  // image indices
  std::vector<std::size_t> text_owner_;  // text index -> example index
  std::vector<std::size_t> attacked_text_;  // example index -> attacked text index
};

/// One cell of the transfer grid.
struct TransferReport {
  std::string source_model_id;
  std::string target_model_id;
  std::string attack_label;
  AsrConvention convention = AsrConvention::CorrectOnly;
  std::map<int, AsrValue> tr_asr;
  std::map<int, AsrValue> ir_asr;
  int num_examples = 0;
  std::string config_hash;
  bool missing = false;

  /// Percentages in range and ASR@K non-increasing in K.
  void check_invariants() const;
};

struct AttackRun {
  std::string surrogate_model_id;
  std::string attack_label;
  std::string config_hash;
  std::vector<AttackedExample> examples;
};

TransferReport evaluate_run(const EncoderModel& target, const AttackRun& run,
                            const std::vector<EvalExample>& gallery,
                            const std::vector<int>& k_list, AsrConvention convention);

/// Full source x target grid; sources without a run yield missing cells.
std::vector<TransferReport> transfer_matrix(const std::vector<const EncoderModel*>& models,
                                            const std::vector<AttackRun>& runs,
                                            const std::vector<EvalExample>& gallery,
                                            const std::vector<int>& k_list,
                                            AsrConvention convention);

/// Mean ASR@K over the off-diagonal cells (source != target) of a grid.
std::optional<double> mean_off_diagonal(const std::vector<TransferReport>& grid, int k,
                                        bool text_retrieval);

// ---- parameter sweep (Table 2 layout) ----

struct SweepRow {
  std::string label;
  AttackConfig config;
  std::vector<TransferReport> reports;  // one per target model
};

struct SweepReport {
  std::string kind;  // "weights" or "samples"
  std::vector<SweepRow> rows;
};

/// The (lambda, mu, nu) grid in steps of 0.2 with lambda > 0 and at most one
/// of mu, nu zero — 14 rows.
std::vector<std::array<double, 3>> default_weight_grid();

SweepReport sweep_parameters(const EncoderModel& surrogate,
                             const std::vector<const EncoderModel*>& targets,
                             const std::vector<EvalExample>& gallery, const AttackConfig& base,
                             const std::string& kind, const std::vector<int>& sample_grid,
                             const std::vector<std::array<double, 3>>& weight_grid,
                             const std::vector<int>& k_list, AsrConvention convention,
                             int jobs = 1);

// ---- ablation (Fig. 6 protocol) ----

enum class AblationSetting { Full, Setting1, Setting2, SgaBaseline };

std::string_view to_string(AblationSetting setting);
AblationSetting ablation_setting_from_string(std::string_view name);

/// Config transform for one ablation setting: Setting1 replaces the
/// diversified image update with the SGA update; Setting2 replaces the
/// triangle text objective with the deviate-from-final-only scheme.
AttackConfig ablation_config(const AttackConfig& base, AblationSetting setting);

struct AblationRow {
  AblationSetting setting;
  std::vector<TransferReport> reports;
};

struct AblationReport {
  std::vector<AblationRow> rows;
};

AblationReport ablation_run(const EncoderModel& surrogate,
                            const std::vector<const EncoderModel*>& targets,
                            const std::vector<EvalExample>& gallery, const AttackConfig& base,
                            const std::vector<AblationSetting>& settings,
                            const std::vector<int>& k_list, AsrConvention convention,
                            int jobs = 1);

}  // namespace ird
