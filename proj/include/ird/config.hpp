#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "ird/core.hpp"
#include "ird/train.hpp"

namespace ird {

/// Bad config file or command usage (CLI exit code 1).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json attack_config_to_json(const AttackConfig& config);
AttackConfig attack_config_from_json(const nlohmann::json& j);

/// Everything a run needs: attack hyperparameters plus dataset, checkpoint,
/// and output locations, evaluation Ks, and sweep grids. Unknown keys are
/// rejected. config_hash() covers only the semantic fields (not filesystem
/// locations or the worker count), so relocated reruns hash identically.
struct RunConfig {
  AttackConfig attack{};

  std::string dataset_dir;
  std::vector<std::string> model_paths;
  std::string surrogate_path;
  std::string output_dir;
  int jobs = 1;

  std::vector<int> k_list{1, 5, 10};
  std::string convention = "correct_only";
  std::string attack_split = "test";

  int gen_count = 340;
  std::uint64_t gen_seed = 7;

  std::vector<std::string> train_specs{"vit-h64-e32-t16", "cnn-h64-e32-t16",
                                       "vit-h64-e32-t16", "cnn-h64-e32-t16"};
  std::uint64_t train_seed = 1;
  TrainOptions train_options{};

  std::string sweep_kind = "weights";
  std::vector<int> sweep_samples{3, 4, 5, 6, 7};
  std::vector<std::array<double, 3>> sweep_weights;  // empty -> default grid

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  nlohmann::json semantic_json() const;
  std::string config_hash() const;
  void validate() const;
};

}  // namespace ird
