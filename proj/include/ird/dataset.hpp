#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ird/core.hpp"

namespace ird {

/// Dataset file is unreadable or inconsistent.
struct ManifestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ManifestEntry {
  std::string example_id;
  std::string image_ref;  ///< path relative to the manifest directory
  ImageTensor image;
  std::vector<TokenSequence> captions;
  std::string split;  ///< train | val | test
};

struct DatasetManifest {
  Vocabulary vocabulary;
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> split(std::string_view name) const;
  const ManifestEntry* find(const std::string& example_id) const;
};

/// n procedurally drawn 16x16x3 scenes (one colored shape on a plain
/// background), each with 3-5 template captions naming color, shape, and
/// grid position. Attribute combinations are unique per entry. Splits are
/// assigned 60/10/30 train/val/test. Deterministic per seed.
DatasetManifest generate_toy_dataset(int n, std::uint64_t seed);

/// Writes manifest.jsonl plus per-entry float64 image containers and PNG
/// previews under `dir`.
void save_dataset(const DatasetManifest& dataset, const std::filesystem::path& dir);

/// Loads a dataset directory (or a manifest.jsonl path directly) back into
/// memory, validating ids, captions, and image files. save -> load round
/// trips bit-exactly.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Reads a single rank-3 float64 image container.
ImageTensor load_image_container(const std::filesystem::path& path);

}  // namespace ird
