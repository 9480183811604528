#pragma once

#include <string>
#include <vector>

#include "ird/dataset.hpp"
#include "ird/model.hpp"

namespace ird {

/// A model spec failed to reach the minimum validation recall.
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainOptions {
  int batch_size = 128;  ///< in-batch negatives approximate the full gallery
  double learning_rate = 1e-2;
  double lr_decay = 0.5;     ///< stepped decay factor
  int lr_decay_every = 200;  ///< epochs between decay steps
  int warmup_epochs = 50;    ///< linear learning-rate warmup
  int max_epochs = 900;
  double target_r1 = 0.9;  ///< stop once min(TR, IR) validation R@1 reaches this
  double min_r1 = 0.7;     ///< below this at the cap -> TrainingError
  double temperature = 0.07;
  int eval_every = 5;  ///< epochs between validation passes
};

struct TrainSummary {
  std::string model_id;
  int epochs_run = 0;
  double final_loss = 0.0;
  double val_tr_r1 = 0.0;
  double val_ir_r1 = 0.0;
  bool reached_target = false;
};

/// Validation R@1 in both directions over a gallery of entries (image query
/// against all captions, each caption against all images).
std::pair<double, double> retrieval_r1(const EncoderModel& model,
                                       const std::vector<const ManifestEntry*>& entries);

/// Trains one toy dual encoder per spec tag on the dataset's train split by
/// symmetric in-batch contrastive loss over cosine similarities, stopping
/// early once validation R@1 reaches the target. The position in
/// `spec_tags` seeds the weight init, so repeated tags give independently
/// seeded models; model ids are "<tag>@m<i>". Deterministic per
/// (spec_tags, seed, dataset).
std::vector<ToyDualEncoder> train_toy_models(const DatasetManifest& dataset,
                                             const std::vector<std::string>& spec_tags,
                                             std::uint64_t seed,
                                             const TrainOptions& options = {},
                                             std::vector<TrainSummary>* summaries = nullptr);

}  // namespace ird
