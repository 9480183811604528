#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ird/core.hpp"
#include "ird/model.hpp"

namespace ird {

/// A triangle sample with its sign-step perturbation and (once scored) the
/// value of the text-guided selection objective.
struct PerturbationCandidate {
  SimplexWeights weights{};
  ImageTensor sample_point{};          ///< e_k
  std::vector<double> perturbation{};  ///< entries in {-alpha, 0, +alpha}
  double score = 0.0;
  bool scored = false;
};

struct StepRecord {
  int step = 0;                         ///< 1-based
  SimplexWeights weights{0.0, 0.0, 1.0};
  bool sampled = false;                 ///< true when weights came from triangle sampling
  double loss_before = 0.0;
  double loss_after = 0.0;
  double linf_to_clean = 0.0;
};

struct AttackTrajectory {
  std::vector<StepRecord> steps;
};

struct AdversarialRecord {
  std::string example_id;
  std::string clean_image_ref;
  ImageTensor adv_image;       ///< v'_T
  ImageTensor adv_prev_image;  ///< v'_{T-1}
  TokenSequence clean_caption;
  std::optional<TokenSequence> adv_caption;
  std::vector<std::size_t> substituted_positions;
  double text_objective_before = 0.0;  ///< valid when adv_caption is present
  double text_objective_after = 0.0;
  AttackConfig config;
  AttackTrajectory trajectory;
  std::string surrogate_model_id;
  double loss_clean = 0.0;    ///< J at the clean image
  double loss_initial = 0.0;  ///< J at the noise-initialized iterate
  double loss_final = 0.0;    ///< J at v'_T
  std::vector<ImageTensor> iterates;  ///< v'_0..v'_T when config.record_iterates
};

/// Image-side objective: J summed over the attacked caption plus any
/// caption-set extras (empty set = single-caption guidance).
double guidance_loss(const EncoderModel& model, const ImageTensor& image,
                     const TokenSequence& caption,
                     const std::vector<TokenSequence>& extra_captions = {});
std::vector<double> guidance_grad(const EncoderModel& model, const ImageTensor& image,
                                  const TokenSequence& caption,
                                  const std::vector<TokenSequence>& extra_captions = {});

/// Bilinear resize of `e` to round(scale * H) x round(scale * W) per scale.
std::vector<ImageTensor> scale_augment(const ImageTensor& e, const std::vector<double>& scales);

/// Gradient of the summed objective over the resized set built from `point`,
/// pulled back through each resize operator to the resolution of `point`.
std::vector<double> scale_set_pullback_grad(const EncoderModel& model, const ImageTensor& point,
                                            const TokenSequence& caption,
                                            const std::vector<double>& scales,
                                            const std::vector<TokenSequence>& extra_captions = {});

/// Samples config.num_samples triangle points (uniform simplex draws, or
/// config.forced_weights copies) and attaches the sign-step perturbation
/// computed at each sample.
std::vector<PerturbationCandidate> compute_candidates(
    const EncoderModel& model, const ImageTensor& v, const ImageTensor& v_prev,
    const ImageTensor& v_cur, const TokenSequence& t, const AttackConfig& config,
    RngStream& rng, const std::vector<TokenSequence>& extra_captions = {});

/// Scores each candidate as J at project_linf(v_cur + p_m) and returns the
/// argmax (ties broken by lowest index). Scores are written back into the
/// candidate list.
std::pair<std::size_t, PerturbationCandidate> select_best_candidate(
    const EncoderModel& model, const ImageTensor& v_cur, const TokenSequence& t,
    std::vector<PerturbationCandidate>& candidates, const ImageTensor& v,
    const PerturbationBudget& budget, const std::vector<TokenSequence>& extra_captions = {});

/// One diversified step: sample the triangle, select by the text-guided
/// objective, augment the selected sample over the scale set, and step
/// v_cur by the sign of the pulled-back gradient sum (projected).
std::pair<ImageTensor, StepRecord> ird_step(const EncoderModel& model, const ImageTensor& v,
                                            const ImageTensor& v_prev, const ImageTensor& v_cur,
                                            const TokenSequence& t, const AttackConfig& config,
                                            RngStream& rng, int step_index,
                                            const std::vector<TokenSequence>& extra_captions = {});

AdversarialRecord pgd_attack(const EncoderModel& model, const ImageTensor& v,
                             const TokenSequence& t, const AttackConfig& config,
                             const std::string& example_id = "example",
                             const std::vector<TokenSequence>& extra_captions = {});
AdversarialRecord sga_attack(const EncoderModel& model, const ImageTensor& v,
                             const TokenSequence& t, const AttackConfig& config,
                             const std::string& example_id = "example",
                             const std::vector<TokenSequence>& extra_captions = {});
AdversarialRecord ird_attack(const EncoderModel& model, const ImageTensor& v,
                             const TokenSequence& t, const AttackConfig& config,
                             const std::string& example_id = "example",
                             const std::vector<TokenSequence>& extra_captions = {});

/// Dispatches on config.method.
AdversarialRecord run_image_attack(const EncoderModel& model, const ImageTensor& v,
                                   const TokenSequence& t, const AttackConfig& config,
                                   const std::string& example_id = "example",
                                   const std::vector<TokenSequence>& extra_captions = {});

}  // namespace ird
