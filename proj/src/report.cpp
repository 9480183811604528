#include "ird/report.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace ird {

namespace {

using nlohmann::json;

json asr_side_to_json(const std::map<int, AsrValue>& side) {
  json j = json::object();
  for (const auto& [k, value] : side) {
    json cell;
    cell["successes"] = value.successes;
    cell["denominator"] = value.denominator;
    if (value.percent) {
      cell["percent"] = *value.percent;
    } else {
      cell["percent"] = nullptr;  // undefined (empty denominator), not 0
    }
    j[std::to_string(k)] = cell;
  }
  return j;
}

std::string format_pct(const AsrValue& value) {
  if (!value.percent) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *value.percent);
  return buf;
}

std::string cell_at(const TransferReport& report, int k, bool tr) {
  if (report.missing) return "missing";
  const auto& side = tr ? report.tr_asr : report.ir_asr;
  const auto it = side.find(k);
  if (it == side.end()) return "n/a";
  return format_pct(it->second);
}

std::string render_grid_rows(const std::vector<std::string>& row_labels,
                             const std::vector<std::string>& target_ids,
                             const std::vector<std::vector<std::string>>& cells, int k) {
  std::vector<std::string> header{"Source/Attack"};
  for (const auto& t : target_ids) {
    header.push_back(t + " TR R@" + std::to_string(k));
    header.push_back(t + " IR R@" + std::to_string(k));
  }
  std::vector<std::size_t> widths(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) widths[c] = header[c].size();
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    widths[0] = std::max(widths[0], row_labels[r].size());
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      widths[c + 1] = std::max(widths[c + 1], cells[r][c].size());
    }
  }
  std::ostringstream out;
  auto emit_row = [&](const std::string& label, const std::vector<std::string>& row) {
    out << label;
    out << std::string(widths[0] - label.size(), ' ');
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << "  " << std::string(widths[c + 1] - row[c].size(), ' ') << row[c];
    }
    out << "\n";
  };
  emit_row(header[0], std::vector<std::string>(header.begin() + 1, header.end()));
  for (std::size_t r = 0; r < row_labels.size(); ++r) emit_row(row_labels[r], cells[r]);
  return out.str();
}

std::vector<std::string> ordered_targets(const std::vector<TransferReport>& reports) {
  std::vector<std::string> targets;
  for (const auto& r : reports) {
    if (std::find(targets.begin(), targets.end(), r.target_model_id) == targets.end()) {
      targets.push_back(r.target_model_id);
    }
  }
  return targets;
}

}  // namespace

json transfer_report_to_json(const TransferReport& report) {
  json j;
  j["source"] = report.source_model_id;
  j["target"] = report.target_model_id;
  j["attack"] = report.attack_label;
  j["convention"] = std::string(to_string(report.convention));
  j["num_examples"] = report.num_examples;
  j["config_hash"] = report.config_hash;
  j["missing"] = report.missing;
  if (!report.missing) {
    j["tr_asr"] = asr_side_to_json(report.tr_asr);
    j["ir_asr"] = asr_side_to_json(report.ir_asr);
  }
  return j;
}

json transfer_grid_to_json(const std::vector<TransferReport>& grid,
                           const std::string& config_hash) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "transfer_matrix";
  j["config_hash"] = config_hash;
  json cells = json::array();
  for (const auto& r : grid) cells.push_back(transfer_report_to_json(r));
  j["cells"] = cells;
  return j;
}

json sweep_report_to_json(const SweepReport& report, const std::string& config_hash) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "sweep";
  j["sweep_kind"] = report.kind;
  j["config_hash"] = config_hash;
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r;
    r["label"] = row.label;
    json reports = json::array();
    for (const auto& rep : row.reports) reports.push_back(transfer_report_to_json(rep));
    r["reports"] = reports;
    rows.push_back(r);
  }
  j["rows"] = rows;
  return j;
}

json ablation_report_to_json(const AblationReport& report, const std::string& config_hash) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "ablation";
  j["config_hash"] = config_hash;
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r;
    r["setting"] = std::string(to_string(row.setting));
    json reports = json::array();
    for (const auto& rep : row.reports) reports.push_back(transfer_report_to_json(rep));
    r["reports"] = reports;
    rows.push_back(r);
  }
  j["rows"] = rows;
  return j;
}

std::string render_transfer_table(const std::vector<TransferReport>& grid, int k) {
  std::vector<std::string> sources;
  for (const auto& r : grid) {
    if (std::find(sources.begin(), sources.end(), r.source_model_id) == sources.end()) {
      sources.push_back(r.source_model_id);
    }
  }
  const std::vector<std::string> targets = ordered_targets(grid);

  std::vector<std::string> labels;
  std::vector<std::vector<std::string>> cells;
  for (const auto& source : sources) {
    std::string attack_label;
    std::vector<std::string> row;
    for (const auto& target : targets) {
      const TransferReport* cell = nullptr;
      for (const auto& r : grid) {
        if (r.source_model_id == source && r.target_model_id == target) {
          cell = &r;
          break;
        }
      }
      if (cell == nullptr) {
        row.push_back("missing");
        row.push_back("missing");
        continue;
      }
      attack_label = cell->attack_label;
      row.push_back(cell_at(*cell, k, true));
      row.push_back(cell_at(*cell, k, false));
    }
    labels.push_back(source + " / " + attack_label);
    cells.push_back(std::move(row));
  }
  return render_grid_rows(labels, targets, cells, k);
}

std::string render_sweep_table(const SweepReport& report, int k) {
  std::vector<std::string> labels;
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> targets;
  if (!report.rows.empty()) targets = ordered_targets(report.rows.front().reports);
  for (const auto& row : report.rows) {
    labels.push_back(row.label);
    std::vector<std::string> line;
    for (const auto& rep : row.reports) {
      line.push_back(cell_at(rep, k, true));
      line.push_back(cell_at(rep, k, false));
    }
    cells.push_back(std::move(line));
  }
  return render_grid_rows(labels, targets, cells, k);
}

std::string render_ablation_table(const AblationReport& report, int k) {
  std::vector<std::string> labels;
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> targets;
  if (!report.rows.empty()) targets = ordered_targets(report.rows.front().reports);
  for (const auto& row : report.rows) {
    labels.push_back(std::string(to_string(row.setting)));
    std::vector<std::string> line;
    for (const auto& rep : row.reports) {
      line.push_back(cell_at(rep, k, true));
      line.push_back(cell_at(rep, k, false));
    }
    cells.push_back(std::move(line));
  }
  return render_grid_rows(labels, targets, cells, k);
}

RatioReport ratio_report_from_records(const std::vector<AdversarialRecord>& records) {
  if (records.empty()) {
    throw std::invalid_argument("ratio_report: no records");
  }
  RatioReport report;
  report.steps = records.front().config.steps;
  report.num_records = static_cast<int>(records.size());

  std::vector<std::array<double, 3>> sums;
  std::vector<int> counts;
  for (const auto& r : records) {
    if (r.config.steps != report.steps) {
      throw std::invalid_argument("ratio_report: records mix different step counts");
    }
    int iteration = 0;
    for (const auto& s : r.trajectory.steps) {
      if (!s.sampled) continue;
      if (iteration >= static_cast<int>(sums.size())) {
        sums.push_back({0.0, 0.0, 0.0});
        counts.push_back(0);
      }
      sums[static_cast<std::size_t>(iteration)][0] += s.weights.beta;
      sums[static_cast<std::size_t>(iteration)][1] += s.weights.gamma;
      sums[static_cast<std::size_t>(iteration)][2] += s.weights.eta;
      ++counts[static_cast<std::size_t>(iteration)];
      ++iteration;
    }
  }
  for (std::size_t i = 0; i < sums.size(); ++i) {
    const double inv = counts[i] > 0 ? 1.0 / counts[i] : 0.0;
    report.mean_weights.push_back({sums[i][0] * inv, sums[i][1] * inv, sums[i][2] * inv});
  }
  return report;
}

json ratio_report_to_json(const RatioReport& report, const std::string& config_hash) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "ratio_report";
  j["config_hash"] = config_hash;
  j["steps"] = report.steps;
  j["num_records"] = report.num_records;
  json rows = json::array();
  for (std::size_t i = 0; i < report.mean_weights.size(); ++i) {
    rows.push_back({{"iteration", i + 1},
                    {"clean_share", report.mean_weights[i][0]},
                    {"previous_share", report.mean_weights[i][1]},
                    {"adversarial_share", report.mean_weights[i][2]}});
  }
  j["rows"] = rows;
  return j;
}

std::string render_ratio_table(const RatioReport& report) {
  std::ostringstream out;
  out << "iteration      beta     gamma       eta\n";
  char buf[96];
  for (std::size_t i = 0; i < report.mean_weights.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%9zu  %8.4f  %8.4f  %8.4f\n", i + 1,
                  report.mean_weights[i][0], report.mean_weights[i][1],
                  report.mean_weights[i][2]);
    out << buf;
  }
  return out.str();
}

}  // namespace ird
