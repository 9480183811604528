#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"

#include "ird/evaluation.hpp"
#include "ird/image_attack.hpp"

namespace ird {

constexpr int kReportSchemaVersion = 1;

nlohmann::json transfer_report_to_json(const TransferReport& report);
nlohmann::json transfer_grid_to_json(const std::vector<TransferReport>& grid,
                                     const std::string& config_hash);
nlohmann::json sweep_report_to_json(const SweepReport& report, const std::string& config_hash);
nlohmann::json ablation_report_to_json(const AblationReport& report,
                                       const std::string& config_hash);

/// Aligned-column text grid: one row per (source, attack), TR/IR ASR@K
/// columns per target model.
std::string render_transfer_table(const std::vector<TransferReport>& grid, int k);
std::string render_sweep_table(const SweepReport& report, int k);
std::string render_ablation_table(const AblationReport& report, int k);

/// Per-iteration mean simplex weights of the selected samples (sampled
/// steps only: T-1 rows for a T-step run).
struct RatioReport {
  int steps = 0;         ///< T
  int num_records = 0;   ///< runs averaged
  std::vector<std::array<double, 3>> mean_weights;  ///< per sampling iteration
};

RatioReport ratio_report_from_records(const std::vector<AdversarialRecord>& records);
nlohmann::json ratio_report_to_json(const RatioReport& report, const std::string& config_hash);
std::string render_ratio_table(const RatioReport& report);

}  // namespace ird
