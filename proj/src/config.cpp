#include "ird/config.hpp"

#include <cstdio>
#include <fstream>

namespace ird {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::vector<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config: bad value for '" + std::string(key) + "': " + e.what());
  }
}

}  // namespace

json attack_config_to_json(const AttackConfig& config) {
  json j;
  j["method"] = std::string(to_string(config.method));
  j["xi_v"] = config.budget.xi_v;
  j["xi_t"] = config.budget.xi_t;
  j["alpha"] = config.alpha;
  j["steps"] = config.steps;
  j["samples"] = config.num_samples;
  j["scales"] = config.scale_set;
  j["lambda"] = config.lambda_w;
  j["mu"] = config.mu_w;
  j["nu"] = config.nu_w;
  j["word_list"] = config.word_list;
  j["seed"] = config.seed;
  j["sga_augmentation"] = config.sga_augmentation;
  j["text_region"] = config.text_region;
  j["caption_set"] = config.use_caption_set;
  j["record_iterates"] = config.record_iterates;
  if (config.forced_weights) {
    j["forced_weights"] = {config.forced_weights->beta, config.forced_weights->gamma,
                           config.forced_weights->eta};
  }
  return j;
}

AttackConfig attack_config_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"method", "xi_v", "xi_t", "alpha", "steps", "samples", "scales", "lambda",
                       "mu", "nu", "word_list", "seed", "sga_augmentation", "text_region",
                       "caption_set", "record_iterates", "forced_weights"},
                      "attack");
  AttackConfig config;
  std::string method(to_string(config.method));
  read_field(j, "method", method);
  config.method = attack_method_from_string(method);
  read_field(j, "xi_v", config.budget.xi_v);
  read_field(j, "xi_t", config.budget.xi_t);
  read_field(j, "alpha", config.alpha);
  read_field(j, "steps", config.steps);
  read_field(j, "samples", config.num_samples);
  read_field(j, "scales", config.scale_set);
  read_field(j, "lambda", config.lambda_w);
  read_field(j, "mu", config.mu_w);
  read_field(j, "nu", config.nu_w);
  read_field(j, "word_list", config.word_list);
  read_field(j, "seed", config.seed);
  read_field(j, "sga_augmentation", config.sga_augmentation);
  read_field(j, "text_region", config.text_region);
  read_field(j, "caption_set", config.use_caption_set);
  read_field(j, "record_iterates", config.record_iterates);
  if (j.contains("forced_weights") && !j.at("forced_weights").is_null()) {
    std::array<double, 3> w{};
    read_field(j, "forced_weights", w);
    config.forced_weights = SimplexWeights{w[0], w[1], w[2]};
  }
  return config;
}

RunConfig RunConfig::from_json(const json& j) {
  reject_unknown_keys(
      j, {"attack", "dataset", "models", "surrogate", "output", "jobs", "eval", "gen", "train",
          "sweep"},
      "config root");
  RunConfig config;
  if (j.contains("attack")) config.attack = attack_config_from_json(j.at("attack"));
  read_field(j, "dataset", config.dataset_dir);
  read_field(j, "models", config.model_paths);
  read_field(j, "surrogate", config.surrogate_path);
  read_field(j, "output", config.output_dir);
  read_field(j, "jobs", config.jobs);

  if (j.contains("eval")) {
    const json& e = j.at("eval");
    reject_unknown_keys(e, {"k_list", "convention", "split"}, "eval");
    read_field(e, "k_list", config.k_list);
    read_field(e, "convention", config.convention);
    read_field(e, "split", config.attack_split);
  }
  if (j.contains("gen")) {
    const json& g = j.at("gen");
    reject_unknown_keys(g, {"count", "seed"}, "gen");
    read_field(g, "count", config.gen_count);
    read_field(g, "seed", config.gen_seed);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown_keys(t,
                        {"specs", "seed", "batch_size", "learning_rate", "max_epochs",
                         "target_r1", "min_r1", "temperature", "eval_every"},
                        "train");
    read_field(t, "specs", config.train_specs);
    read_field(t, "seed", config.train_seed);
    read_field(t, "batch_size", config.train_options.batch_size);
    read_field(t, "learning_rate", config.train_options.learning_rate);
    read_field(t, "max_epochs", config.train_options.max_epochs);
    read_field(t, "target_r1", config.train_options.target_r1);
    read_field(t, "min_r1", config.train_options.min_r1);
    read_field(t, "temperature", config.train_options.temperature);
    read_field(t, "eval_every", config.train_options.eval_every);
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    reject_unknown_keys(s, {"kind", "samples", "weights"}, "sweep");
    read_field(s, "kind", config.sweep_kind);
    read_field(s, "samples", config.sweep_samples);
    std::vector<std::array<double, 3>> weights;
    read_field(s, "weights", weights);
    config.sweep_weights = weights;
  }
  return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config: cannot open " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config: invalid JSON in " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  json j;
  j["attack"] = attack_config_to_json(attack);
  j["dataset"] = dataset_dir;
  j["models"] = model_paths;
  j["surrogate"] = surrogate_path;
  j["output"] = output_dir;
  j["jobs"] = jobs;
  j["eval"] = {{"k_list", k_list}, {"convention", convention}, {"split", attack_split}};
  j["gen"] = {{"count", gen_count}, {"seed", gen_seed}};
  j["train"] = {{"specs", train_specs},
                {"seed", train_seed},
                {"batch_size", train_options.batch_size},
                {"learning_rate", train_options.learning_rate},
                {"max_epochs", train_options.max_epochs},
                {"target_r1", train_options.target_r1},
                {"min_r1", train_options.min_r1},
                {"temperature", train_options.temperature},
                {"eval_every", train_options.eval_every}};
  j["sweep"] = {{"kind", sweep_kind}, {"samples", sweep_samples}, {"weights", sweep_weights}};
  return j;
}

json RunConfig::semantic_json() const {
  json j = to_json();
  j.erase("dataset");
  j.erase("models");
  j.erase("surrogate");
  j.erase("output");
  j.erase("jobs");
  return j;
}

std::string RunConfig::config_hash() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(semantic_json().dump())));
  return buf;
}

void RunConfig::validate() const {
  attack.validate();
  if (jobs < 1) {
    throw ConfigError("config: jobs must be >= 1");
  }
  if (k_list.empty()) {
    throw ConfigError("config: eval.k_list must be nonempty");
  }
  for (int k : k_list) {
    if (k < 1) throw ConfigError("config: eval.k_list entries must be >= 1");
  }
  if (convention != "all" && convention != "correct_only" && convention != "both") {
    throw ConfigError("config: eval.convention must be all | correct_only | both");
  }
  if (attack_split != "train" && attack_split != "val" && attack_split != "test") {
    throw ConfigError("config: eval.split must be train | val | test");
  }
  if (sweep_kind != "weights" && sweep_kind != "samples") {
    throw ConfigError("config: sweep.kind must be weights | samples");
  }
}

}  // namespace ird
