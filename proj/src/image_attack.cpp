#include "ird/image_attack.hpp"

#include <algorithm>
#include <cmath>

#include "ird/resize.hpp"

namespace ird {

namespace {

std::vector<double> signed_step(const std::vector<double>& grad, double alpha) {
  std::vector<double> step(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) step[i] = alpha * sign(grad[i]);
  return step;
}

ImageTensor add_step(const ImageTensor& image, const std::vector<double>& step) {
  std::vector<double> out = image.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += step[i];
  return ImageTensor(image.shape(), std::move(out));
}

}  // namespace

double guidance_loss(const EncoderModel& model, const ImageTensor& image,
                     const TokenSequence& caption,
                     const std::vector<TokenSequence>& extra_captions) {
  double loss = model.loss_J(image, caption);
  for (const auto& extra : extra_captions) loss += model.loss_J(image, extra);
  return loss;
}

std::vector<double> guidance_grad(const EncoderModel& model, const ImageTensor& image,
                                  const TokenSequence& caption,
                                  const std::vector<TokenSequence>& extra_captions) {
  std::vector<double> grad = model.grad_J_image(image, caption);
  for (const auto& extra : extra_captions) {
    const std::vector<double> g = model.grad_J_image(image, extra);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
  }
  return grad;
}

std::vector<ImageTensor> scale_augment(const ImageTensor& e, const std::vector<double>& scales) {
  if (scales.empty()) {
    throw std::invalid_argument("scale_augment: empty scale set");
  }
  std::vector<ImageTensor> out;
  out.reserve(scales.size());
  for (double s : scales) {
    const ImageShape target = scaled_shape(e.shape(), s);
    out.push_back(BilinearResizer(e.shape(), target).forward(e));
  }
  return out;
}

std::vector<double> scale_set_pullback_grad(const EncoderModel& model, const ImageTensor& point,
                                            const TokenSequence& caption,
                                            const std::vector<double>& scales,
                                            const std::vector<TokenSequence>& extra_captions) {
  if (scales.empty()) {
    throw std::invalid_argument("scale_set_pullback_grad: empty scale set");
  }
  std::vector<double> total(point.size(), 0.0);
  for (double s : scales) {
    const ImageShape target = scaled_shape(point.shape(), s);
    if (target == point.shape()) {
      const std::vector<double> g = guidance_grad(model, point, caption, extra_captions);
      for (std::size_t i = 0; i < total.size(); ++i) total[i] += g[i];
    } else {
      const BilinearResizer resizer(point.shape(), target);
      const ImageTensor resized = resizer.forward(point);
      const std::vector<double> g = guidance_grad(model, resized, caption, extra_captions);
      const std::vector<double> pulled = resizer.transpose(g);
      for (std::size_t i = 0; i < total.size(); ++i) total[i] += pulled[i];
    }
  }
  return total;
}

std::vector<PerturbationCandidate> compute_candidates(
    const EncoderModel& model, const ImageTensor& v, const ImageTensor& v_prev,
    const ImageTensor& v_cur, const TokenSequence& t, const AttackConfig& config,
    RngStream& rng, const std::vector<TokenSequence>& extra_captions) {
  std::vector<SimplexWeights> weights;
  if (config.forced_weights) {
    weights.assign(static_cast<std::size_t>(config.num_samples), *config.forced_weights);
  } else {
    weights = sample_simplex(config.num_samples, rng);
  }
  std::vector<PerturbationCandidate> candidates;
  candidates.reserve(weights.size());
  for (const auto& w : weights) {
    PerturbationCandidate cand;
    cand.weights = w;
    cand.sample_point = blend_point(v, v_prev, v_cur, w);
    cand.perturbation =
        signed_step(guidance_grad(model, cand.sample_point, t, extra_captions), config.alpha);
    candidates.push_back(std::move(cand));
  }
  return candidates;
}

std::pair<std::size_t, PerturbationCandidate> select_best_candidate(
    const EncoderModel& model, const ImageTensor& v_cur, const TokenSequence& t,
    std::vector<PerturbationCandidate>& candidates, const ImageTensor& v,
    const PerturbationBudget& budget, const std::vector<TokenSequence>& extra_captions) {
  if (candidates.empty()) {
    throw std::invalid_argument("select_best_candidate: empty candidate list");
  }
  std::size_t best = 0;
  for (std::size_t m = 0; m < candidates.size(); ++m) {
    const ImageTensor reached = project_linf(add_step(v_cur, candidates[m].perturbation), v, budget);
    candidates[m].score = guidance_loss(model, reached, t, extra_captions);
    candidates[m].scored = true;
    if (candidates[m].score > candidates[best].score) best = m;
  }
  return {best, candidates[best]};
}

std::pair<ImageTensor, StepRecord> ird_step(const EncoderModel& model, const ImageTensor& v,
                                            const ImageTensor& v_prev, const ImageTensor& v_cur,
                                            const TokenSequence& t, const AttackConfig& config,
                                            RngStream& rng, int step_index,
                                            const std::vector<TokenSequence>& extra_captions) {
  std::vector<PerturbationCandidate> candidates =
      compute_candidates(model, v, v_prev, v_cur, t, config, rng, extra_captions);
  const auto [index, best] =
      select_best_candidate(model, v_cur, t, candidates, v, config.budget, extra_captions);
  const std::vector<double> grad =
      scale_set_pullback_grad(model, best.sample_point, t, config.scale_set, extra_captions);
  const ImageTensor next =
      project_linf(add_step(v_cur, signed_step(grad, config.alpha)), v, config.budget);

  StepRecord record;
  record.step = step_index;
  record.weights = best.weights;
  record.sampled = true;
  record.loss_before = guidance_loss(model, v_cur, t, extra_captions);
  record.loss_after = guidance_loss(model, next, t, extra_captions);
  record.linf_to_clean = linf_distance(next, v);
  return {next, record};
}

namespace {

AdversarialRecord run_attack_loop(const EncoderModel& model, const ImageTensor& v,
                                  const TokenSequence& t, const AttackConfig& config,
                                  const std::string& example_id,
                                  const std::vector<TokenSequence>& extra_captions) {
  config.validate();
  if (t.empty()) {
    throw std::invalid_argument("image attack: caption must have at least one token");
  }
  if (!v.in_unit_range()) {
    throw std::invalid_argument("image attack: clean image must lie in [0, 1]");
  }

  RngStream root(config.seed, example_id);
  auto init_rng = root.fork("init");
  std::vector<double> noisy = v.pixels();
  for (auto& p : noisy) {
    p += init_rng.uniform(-config.budget.xi_v, config.budget.xi_v);
  }
  const ImageTensor v0 = project_linf(ImageTensor(v.shape(), std::move(noisy)), v, config.budget);

  AdversarialRecord record;
  record.example_id = example_id;
  record.clean_image_ref = example_id;
  record.clean_caption = t;
  record.config = config;
  record.surrogate_model_id = model.model_id();
  record.loss_clean = guidance_loss(model, v, t, extra_captions);
  record.loss_initial = guidance_loss(model, v0, t, extra_captions);
  if (config.record_iterates) record.iterates.push_back(v0);

  auto simplex_rng = root.fork("simplex");
  ImageTensor v_prev = v0;
  ImageTensor v_cur = v0;
  double loss_cur = record.loss_initial;

  for (int step = 1; step <= config.steps; ++step) {
    if (config.method == AttackMethod::IRD && step >= 2) {
      auto [next, step_record] =
          ird_step(model, v, v_prev, v_cur, t, config, simplex_rng, step, extra_captions);
      v_prev = v_cur;
      v_cur = next;
      loss_cur = step_record.loss_after;
      record.trajectory.steps.push_back(step_record);
    } else {
      // PGD / SGA update; also the first IRD iteration, where no previous
      // iterate exists yet and the step is SGA-style.
      std::vector<double> grad;
      const bool augmented = config.method == AttackMethod::SGA ? config.sga_augmentation
                                                                : config.method == AttackMethod::IRD;
      if (augmented) {
        grad = scale_set_pullback_grad(model, v_cur, t, config.scale_set, extra_captions);
      } else {
        grad = guidance_grad(model, v_cur, t, extra_captions);
      }
      const ImageTensor next =
          project_linf(add_step(v_cur, signed_step(grad, config.alpha)), v, config.budget);
      StepRecord step_record;
      step_record.step = step;
      step_record.loss_before = loss_cur;
      step_record.loss_after = guidance_loss(model, next, t, extra_captions);
      step_record.linf_to_clean = linf_distance(next, v);
      v_prev = v_cur;
      v_cur = next;
      loss_cur = step_record.loss_after;
      record.trajectory.steps.push_back(step_record);
    }
    if (config.record_iterates) record.iterates.push_back(v_cur);
  }

  record.adv_image = v_cur;
  record.adv_prev_image = v_prev;
  record.loss_final = loss_cur;

  const double slack = config.budget.xi_v + 1e-12;
  if (linf_distance(record.adv_image, v) > slack || !record.adv_image.in_unit_range() ||
      linf_distance(record.adv_prev_image, v) > slack || !record.adv_prev_image.in_unit_range()) {
    throw InvariantViolation("image attack: iterate left the perturbation budget for " +
                             example_id);
  }
  return record;
}

}  // namespace

AdversarialRecord pgd_attack(const EncoderModel& model, const ImageTensor& v,
                             const TokenSequence& t, const AttackConfig& config,
                             const std::string& example_id,
                             const std::vector<TokenSequence>& extra_captions) {
  if (config.method != AttackMethod::PGD) {
    throw std::invalid_argument("pgd_attack: config.method must be PGD");
  }
  return run_attack_loop(model, v, t, config, example_id, extra_captions);
}

AdversarialRecord sga_attack(const EncoderModel& model, const ImageTensor& v,
                             const TokenSequence& t, const AttackConfig& config,
                             const std::string& example_id,
                             const std::vector<TokenSequence>& extra_captions) {
  if (config.method != AttackMethod::SGA) {
    throw std::invalid_argument("sga_attack: config.method must be SGA");
  }
  return run_attack_loop(model, v, t, config, example_id, extra_captions);
}

AdversarialRecord ird_attack(const EncoderModel& model, const ImageTensor& v,
                             const TokenSequence& t, const AttackConfig& config,
                             const std::string& example_id,
                             const std::vector<TokenSequence>& extra_captions) {
  if (config.method != AttackMethod::IRD) {
    throw std::invalid_argument("ird_attack: config.method must be IRD");
  }
  return run_attack_loop(model, v, t, config, example_id, extra_captions);
}

AdversarialRecord run_image_attack(const EncoderModel& model, const ImageTensor& v,
                                   const TokenSequence& t, const AttackConfig& config,
                                   const std::string& example_id,
                                   const std::vector<TokenSequence>& extra_captions) {
  return run_attack_loop(model, v, t, config, example_id, extra_captions);
}

}  // namespace ird
