#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ird/pipeline.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::optional<std::string> dataset, output, surrogate, method, split;
  std::optional<std::vector<std::string>> models;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs, count, steps, samples;
};

ird::RunConfig resolve_config(const CliOverrides& cli) {
  ird::RunConfig config;
  if (!cli.config_path.empty()) {
    config = ird::RunConfig::load(cli.config_path);
  }
  if (cli.dataset) config.dataset_dir = *cli.dataset;
  if (cli.output) config.output_dir = *cli.output;
  if (cli.surrogate) config.surrogate_path = *cli.surrogate;
  if (cli.models) config.model_paths = *cli.models;
  if (cli.method) config.attack.method = ird::attack_method_from_string(*cli.method);
  if (cli.split) config.attack_split = *cli.split;
  if (cli.seed) {
    config.attack.seed = *cli.seed;
    config.gen_seed = *cli.seed;
    config.train_seed = *cli.seed;
  }
  if (cli.jobs) config.jobs = *cli.jobs;
  if (cli.count) config.gen_count = *cli.count;
  if (cli.steps) config.attack.steps = *cli.steps;
  if (cli.samples) config.attack.num_samples = *cli.samples;
  // env var override for the output directory only
  if (const char* env_out = std::getenv("IRD_OUTPUT_DIR")) {
    config.output_dir = env_out;
  }
  return config;
}

void add_common_options(CLI::App* cmd, CliOverrides& cli) {
  cmd->add_option("-c,--config", cli.config_path, "JSON config file");
  cmd->add_option("--dataset", cli.dataset, "dataset directory");
  cmd->add_option("-o,--output", cli.output, "output directory");
  cmd->add_option("--surrogate", cli.surrogate, "surrogate checkpoint path");
  cmd->add_option("--models", cli.models, "target model checkpoint paths");
  cmd->add_option("--method", cli.method, "attack method: pgd | sga | ird");
  cmd->add_option("--split", cli.split, "dataset split to attack/evaluate");
  cmd->add_option("--seed", cli.seed, "seed override (attack, gen, train)");
  cmd->add_option("--jobs", cli.jobs, "worker count (default 1, bit-reproducible)");
  cmd->add_option("--count", cli.count, "generated dataset size");
  cmd->add_option("--steps", cli.steps, "attack iteration count T");
  cmd->add_option("--samples", cli.samples, "triangle samples per step N");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal adversarial attack toolkit: intersection-region diversification, "
               "SGA/PGD baselines, tri-weighted text attacks, and retrieval ASR evaluation"};
  app.require_subcommand(1);

  CliOverrides cli;
  void (*command)(const ird::RunConfig&) = nullptr;

  struct Sub {
    const char* name;
    const char* help;
    void (*fn)(const ird::RunConfig&);
  };
  const Sub subs[] = {
      {"gen-data", "generate the procedural toy dataset", &ird::cmd_gen_data},
      {"train", "train toy dual encoders on the dataset", &ird::cmd_train},
      {"attack", "craft adversarial examples for one split", &ird::cmd_attack},
      {"eval", "evaluate a finished run against target models", &ird::cmd_eval},
      {"sweep", "parameter sweep over N or (lambda, mu, nu)", &ird::cmd_sweep},
      {"ablate", "ablation settings against the SGA baseline", &ird::cmd_ablate},
      {"ratio-report", "per-iteration mean simplex weights of selected samples",
       &ird::cmd_ratio_report},
  };
  for (const auto& sub : subs) {
    CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
    add_common_options(cmd, cli);
    cmd->callback([&command, fn = sub.fn]() { command = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    command(resolve_config(cli));
    return 0;
  } catch (const ird::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
