#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "ird/image_attack.hpp"

namespace ird {

/// Writes one attack run into `dir`: run.json (attack config, surrogate id,
/// config hash), index.jsonl (one record per line, losses and trajectory
/// included), images/<id>.tde (adv + previous iterate, float64), and lossy
/// PNG previews. Image refs inside the index are relative to `dir`.
/// Refuses to overwrite a run directory whose config hash differs.
void save_run(const std::vector<AdversarialRecord>& records, const std::filesystem::path& dir,
              const std::string& config_hash);

struct LoadedRun {
  std::vector<AdversarialRecord> records;
  std::string config_hash;
  std::string surrogate_model_id;
  std::string method;
};

/// Bit-exact inverse of save_run for the float payloads.
LoadedRun load_run(const std::filesystem::path& dir);

}  // namespace ird
