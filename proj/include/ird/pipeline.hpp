#pragma once

#include "ird/config.hpp"

namespace ird {

/// CLI subcommand bodies. Each is deterministic given the config; artifacts
/// land under config.output_dir (gen-data writes the dataset directory).
void cmd_gen_data(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_attack(const RunConfig& config);
void cmd_eval(const RunConfig& config);
void cmd_sweep(const RunConfig& config);
void cmd_ablate(const RunConfig& config);
void cmd_ratio_report(const RunConfig& config);

}  // namespace ird
