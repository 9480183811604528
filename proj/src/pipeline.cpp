#include "ird/pipeline.hpp"

#include <fstream>
#include <iostream>
#include <memory>

#include "ird/attack_runner.hpp"
#include "ird/dataset.hpp"
#include "ird/evaluation.hpp"
#include "ird/report.hpp"
#include "ird/run_io.hpp"
#include "ird/train.hpp"

namespace ird {

namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << text;
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

DatasetManifest load_dataset_checked(const RunConfig& config) {
  if (config.dataset_dir.empty()) {
    throw ConfigError("config: dataset path is required for this command");
  }
  return load_manifest(config.dataset_dir);
}

ToyDualEncoder load_surrogate(const RunConfig& config, const DatasetManifest& dataset) {
  if (config.surrogate_path.empty()) {
    throw ConfigError("config: surrogate checkpoint path is required for this command");
  }
  if (!std::filesystem::exists(config.surrogate_path)) {
    throw ConfigError("config: missing surrogate checkpoint: " + config.surrogate_path);
  }
  return load_model(config.surrogate_path, dataset.vocabulary);
}

std::vector<ToyDualEncoder> load_targets(const RunConfig& config,
                                         const DatasetManifest& dataset) {
  if (config.model_paths.empty()) {
    throw ConfigError("config: eval needs at least one model checkpoint in 'models'");
  }
  std::vector<ToyDualEncoder> models;
  models.reserve(config.model_paths.size());
  for (const auto& path : config.model_paths) {
    if (!std::filesystem::exists(path)) {
      throw ConfigError("config: missing model checkpoint: " + path);
    }
    models.push_back(load_model(path, dataset.vocabulary));
  }
  return models;
}

std::vector<EvalExample> gallery_for(const RunConfig& config, const DatasetManifest& dataset) {
  const auto entries = dataset.split(config.attack_split);
  if (entries.size() < 2) {
    throw ConfigError("config: split '" + config.attack_split + "' has fewer than 2 entries");
  }
  return to_eval_examples(entries);
}

std::vector<AsrConvention> conventions_for(const RunConfig& config) {
  if (config.convention == "both") {
    return {AsrConvention::CorrectOnly, AsrConvention::All};
  }
  return {asr_convention_from_string(config.convention)};
}

std::filesystem::path ensure_output_dir(const RunConfig& config) {
  if (config.output_dir.empty()) {
    throw ConfigError("config: output directory is required for this command");
  }
  std::filesystem::create_directories(config.output_dir);
  return config.output_dir;
}

}  // namespace

void cmd_gen_data(const RunConfig& config) {
  config.validate();
  if (config.dataset_dir.empty()) {
    throw ConfigError("config: dataset path is required for gen-data");
  }
  const DatasetManifest dataset = generate_toy_dataset(config.gen_count, config.gen_seed);
  save_dataset(dataset, config.dataset_dir);
  std::cout << "wrote " << dataset.entries.size() << " examples to " << config.dataset_dir
            << "\n";
}

void cmd_train(const RunConfig& config) {
  config.validate();
  const DatasetManifest dataset = load_dataset_checked(config);
  const auto out = ensure_output_dir(config);
  std::filesystem::create_directories(out / "models");

  std::vector<TrainSummary> summaries;
  const std::vector<ToyDualEncoder> models =
      train_toy_models(dataset, config.train_specs, config.train_seed, config.train_options,
                       &summaries);
  json report;
  report["schema_version"] = kReportSchemaVersion;
  report["kind"] = "train_summary";
  report["config_hash"] = config.config_hash();
  json rows = json::array();
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto path = out / "models" / (models[i].model_id() + ".tde");
    save_model(models[i], path);
    rows.push_back({{"model_id", summaries[i].model_id},
                    {"checkpoint", "models/" + models[i].model_id() + ".tde"},
                    {"epochs", summaries[i].epochs_run},
                    {"val_tr_r1", summaries[i].val_tr_r1},
                    {"val_ir_r1", summaries[i].val_ir_r1},
                    {"reached_target", summaries[i].reached_target}});
    std::cout << "trained " << summaries[i].model_id << ": val TR R@1 "
              << summaries[i].val_tr_r1 << ", IR R@1 " << summaries[i].val_ir_r1 << " after "
              << summaries[i].epochs_run << " epochs\n";
  }
  report["models"] = rows;
  write_json(out / "train_summary.json", report);
}

void cmd_attack(const RunConfig& config) {
  config.validate();
  const DatasetManifest dataset = load_dataset_checked(config);
  const ToyDualEncoder surrogate = load_surrogate(config, dataset);
  const std::vector<EvalExample> gallery = gallery_for(config, dataset);
  const auto out = ensure_output_dir(config);

  const std::vector<AdversarialRecord> records =
      attack_examples(surrogate, gallery, config.attack, config.jobs);
  save_run(records, out, config.config_hash());
  std::cout << "attacked " << records.size() << " examples with "
            << to_string(config.attack.method) << " -> " << out.string() << "\n";
}

void cmd_eval(const RunConfig& config) {
  config.validate();
  const DatasetManifest dataset = load_dataset_checked(config);
  const std::vector<ToyDualEncoder> targets = load_targets(config, dataset);
  const std::vector<EvalExample> gallery = gallery_for(config, dataset);
  const auto out = ensure_output_dir(config);

  const LoadedRun run = load_run(out);
  AttackRun attack_run{run.surrogate_model_id, run.method, run.config_hash,
                       to_attacked_examples(run.records)};

  json all_reports = json::array();
  std::string table;
  for (const AsrConvention convention : conventions_for(config)) {
    std::vector<TransferReport> reports;
    for (const auto& target : targets) {
      reports.push_back(
          evaluate_run(target, attack_run, gallery, config.k_list, convention));
    }
    all_reports.push_back(transfer_grid_to_json(reports, run.config_hash));
    table += std::string(to_string(convention)) + "\n" +
             render_transfer_table(reports, config.k_list.front()) + "\n";
  }
  json report;
  report["schema_version"] = kReportSchemaVersion;
  report["kind"] = "eval";
  report["config_hash"] = run.config_hash;
  report["grids"] = all_reports;
  write_json(out / "eval_report.json", report);
  write_text(out / "eval_report.txt", table);
  std::cout << table;
}

void cmd_sweep(const RunConfig& config) {
  config.validate();
  const DatasetManifest dataset = load_dataset_checked(config);
  const ToyDualEncoder surrogate = load_surrogate(config, dataset);
  const std::vector<ToyDualEncoder> targets = load_targets(config, dataset);
  const std::vector<EvalExample> gallery = gallery_for(config, dataset);
  const auto out = ensure_output_dir(config);

  std::vector<const EncoderModel*> target_ptrs;
  for (const auto& m : targets) target_ptrs.push_back(&m);

  const SweepReport report = sweep_parameters(
      surrogate, target_ptrs, gallery, config.attack, config.sweep_kind, config.sweep_samples,
      config.sweep_weights, config.k_list,
      conventions_for(config).front(), config.jobs);
  write_json(out / "sweep_report.json", sweep_report_to_json(report, config.config_hash()));
  const std::string table = render_sweep_table(report, config.k_list.front());
  write_text(out / "sweep_report.txt", table);
  std::cout << table;
}

void cmd_ablate(const RunConfig& config) {
  config.validate();
  const DatasetManifest dataset = load_dataset_checked(config);
  const ToyDualEncoder surrogate = load_surrogate(config, dataset);
  const std::vector<ToyDualEncoder> targets = load_targets(config, dataset);
  const std::vector<EvalExample> gallery = gallery_for(config, dataset);
  const auto out = ensure_output_dir(config);

  std::vector<const EncoderModel*> target_ptrs;
  for (const auto& m : targets) target_ptrs.push_back(&m);

  const std::vector<AblationSetting> settings{AblationSetting::Full, AblationSetting::Setting1,
                                              AblationSetting::Setting2,
                                              AblationSetting::SgaBaseline};
  const AblationReport report =
      ablation_run(surrogate, target_ptrs, gallery, config.attack, settings, config.k_list,
                   conventions_for(config).front(), config.jobs);
  write_json(out / "ablation_report.json",
             ablation_report_to_json(report, config.config_hash()));
  const std::string table = render_ablation_table(report, config.k_list.front());
  write_text(out / "ablation_report.txt", table);
  std::cout << table;
}

void cmd_ratio_report(const RunConfig& config) {
  config.validate();
  const auto out = ensure_output_dir(config);
  const LoadedRun run = load_run(out);
  const RatioReport report = ratio_report_from_records(run.records);

  for (const auto& row : report.mean_weights) {
    const double sum = row[0] + row[1] + row[2];
    if (std::abs(sum - 1.0) > 1e-9) {
      throw InvariantViolation("ratio_report: mean weights do not sum to 1");
    }
  }
  write_json(out / "ratio_report.json", ratio_report_to_json(report, run.config_hash));
  const std::string table = render_ratio_table(report);
  write_text(out / "ratio_report.txt", table);
  std::cout << table;
}

}  // namespace ird
