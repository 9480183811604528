#include "ird/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "ird/container.hpp"
#include "ird/png_io.hpp"

namespace ird {

namespace {

using nlohmann::json;

struct NamedColor {
  const char* name;
  double r, g, b;
};

constexpr std::array<NamedColor, 12> kColors{{
    {"red", 0.85, 0.10, 0.10},
    {"green", 0.10, 0.75, 0.10},
    {"blue", 0.10, 0.15, 0.85},
    {"yellow", 0.90, 0.85, 0.10},
    {"purple", 0.55, 0.10, 0.70},
    {"orange", 0.95, 0.55, 0.10},
    {"cyan", 0.10, 0.80, 0.80},
    {"magenta", 0.90, 0.10, 0.70},
    {"white", 0.95, 0.95, 0.95},
    {"black", 0.05, 0.05, 0.05},
    {"brown", 0.55, 0.35, 0.15},
    {"pink", 0.95, 0.60, 0.70},
}};

constexpr std::array<const char*, 4> kShapes{"circle", "square", "triangle", "cross"};
constexpr std::array<const char*, 3> kRows{"top", "middle", "bottom"};
constexpr std::array<const char*, 3> kCols{"left", "center", "right"};
constexpr std::array<const char*, 11> kFillerWords{
    "a", "the", "in", "is", "at", "there", "photo", "of", "on", "plain", "background"};

constexpr ImageShape kSceneShape{16, 16, 3};

Vocabulary toy_vocabulary() {
  std::vector<std::string> words;
  words.emplace_back(Vocabulary::kUnkToken);
  for (const auto& c : kColors) words.emplace_back(c.name);
  for (const auto* s : kShapes) words.emplace_back(s);
  for (const auto* r : kRows) words.emplace_back(r);
  for (const auto* c : kCols) words.emplace_back(c);
  for (const auto* w : kFillerWords) words.emplace_back(w);
  return Vocabulary(std::move(words));
}

// The four shapes differ in footprint as well as outline, so even heavily
// pooled features carry shape identity.
bool inside_shape(int shape_idx, double dx, double dy) {
  switch (shape_idx) {
    case 0:  // circle, large disc
      return dx * dx + dy * dy <= 4.2 * 4.2;
    case 1:  // square, small box
      return std::abs(dx) <= 2.4 && std::abs(dy) <= 2.4;
    case 2:  // triangle, apex up, bottom-heavy
      return dy >= -4.2 && dy <= 4.2 && std::abs(dx) <= (dy + 4.2) * 0.58;
    default:  // cross, thin plus
      return std::abs(dx) <= 4.2 && std::abs(dy) <= 4.2 &&
             (std::abs(dx) <= 1.1 || std::abs(dy) <= 1.1);
  }
}

ImageTensor render_scene(int color_idx, int shape_idx, int row_idx, int col_idx,
                         double bg_shade) {
  std::vector<double> pixels(kSceneShape.pixel_count());
  const NamedColor& color = kColors[static_cast<std::size_t>(color_idx)];
  const double cy = 4.0 + 4.0 * row_idx;
  const double cx = 4.0 + 4.0 * col_idx;
  for (int y = 0; y < kSceneShape.height; ++y) {
    for (int x = 0; x < kSceneShape.width; ++x) {
      const bool hit = inside_shape(shape_idx, x - cx, y - cy);
      const std::size_t base =
          (static_cast<std::size_t>(y) * kSceneShape.width + x) * kSceneShape.channels;
      if (hit) {
        pixels[base + 0] = color.r;
        pixels[base + 1] = color.g;
        pixels[base + 2] = color.b;
      } else {
        pixels[base + 0] = bg_shade;
        pixels[base + 1] = bg_shade;
        pixels[base + 2] = bg_shade;
      }
    }
  }
  return ImageTensor(kSceneShape, std::move(pixels));
}

std::vector<TokenSequence> make_captions(int color_idx, int shape_idx, int row_idx,
                                         int col_idx, RngStream& rng) {
  const std::string color = kColors[static_cast<std::size_t>(color_idx)].name;
  const std::string shape = kShapes[static_cast<std::size_t>(shape_idx)];
  const std::string row = kRows[static_cast<std::size_t>(row_idx)];
  const std::string col = kCols[static_cast<std::size_t>(col_idx)];

  // Every template names the full (color, shape, row, col) tuple so captions
  // identify their scene uniquely across the dataset.
  const std::vector<std::vector<std::string>> templates = {
      {"a", color, shape, "in", "the", row, col},
      {"the", shape, "in", "the", row, col, "is", color},
      {color, shape, "at", "the", row, col},
      {"there", "is", "a", color, shape, "in", "the", row, col},
      {"a", "photo", "of", "a", color, shape, "at", "the", row, col},
  };
  const std::size_t count = 3 + rng.index(3);  // 3..5 captions
  std::vector<std::size_t> order{0, 1, 2, 3, 4};
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.index(i)]);
  }
  std::vector<TokenSequence> captions;
  for (std::size_t k = 0; k < count; ++k) {
    captions.emplace_back(templates[order[k]]);
  }
  return captions;
}

std::string entry_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "ex%04d", i);
  return buf;
}

json caption_to_json(const TokenSequence& caption) {
  return json(caption.tokens());
}

TokenSequence caption_from_json(const json& j, int line, const char* field) {
  if (!j.is_array() || j.empty()) {
    throw ManifestError("manifest line " + std::to_string(line) + ": field '" + field +
                        "' must be a nonempty token array");
  }
  std::vector<std::string> tokens;
  for (const auto& tok : j) {
    if (!tok.is_string() || tok.get<std::string>().empty()) {
      throw ManifestError("manifest line " + std::to_string(line) + ": field '" + field +
                          "' contains a non-string or empty token");
    }
    tokens.push_back(tok.get<std::string>());
  }
  return TokenSequence(std::move(tokens));
}

}  // namespace

std::vector<const ManifestEntry*> DatasetManifest::split(std::string_view name) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.split == name) out.push_back(&e);
  }
  return out;
}

const ManifestEntry* DatasetManifest::find(const std::string& example_id) const {
  for (const auto& e : entries) {
    if (e.example_id == example_id) return &e;
  }
  return nullptr;
}

DatasetManifest generate_toy_dataset(int n, std::uint64_t seed) {
  if (n < 10) {
    throw std::invalid_argument("generate_toy_dataset: n must be >= 10");
  }
  const int total_combos =
      static_cast<int>(kColors.size() * kShapes.size() * kRows.size() * kCols.size());

  const int n_train = static_cast<int>(std::lround(0.6 * n));
  const int n_val = static_cast<int>(std::lround(0.1 * n));
  const int n_test = n - n_train - n_val;
  if (n_train > total_combos) {
    throw std::invalid_argument("generate_toy_dataset: train split exceeds distinct scene count " +
                                std::to_string(total_combos));
  }

  RngStream rng(seed, "toy-dataset");
  std::vector<int> combos(static_cast<std::size_t>(total_combos));
  for (int i = 0; i < total_combos; ++i) combos[static_cast<std::size_t>(i)] = i;
  auto shuffle_rng = rng.fork("combos");
  for (std::size_t i = combos.size(); i > 1; --i) {
    std::swap(combos[i - 1], combos[shuffle_rng.index(i)]);
  }

  // Attribute tuples are unique within each split so every caption
  // identifies its entry inside any one retrieval gallery. Val and test
  // scene types are drawn from the train pool: held-out instances differ by
  // background shade and caption selection, not by unseen attribute
  // combinations.
  std::vector<int> train_combos(combos.begin(), combos.begin() + n_train);
  auto draw_from_train = [&](int count, std::string_view key) {
    if (count > static_cast<int>(train_combos.size())) {
      throw std::invalid_argument("generate_toy_dataset: split larger than the train pool");
    }
    std::vector<int> pool = train_combos;
    auto pool_rng = rng.fork(key);
    for (std::size_t i = pool.size(); i > 1; --i) {
      std::swap(pool[i - 1], pool[pool_rng.index(i)]);
    }
    pool.resize(static_cast<std::size_t>(count));
    return pool;
  };
  const std::vector<int> val_combos = draw_from_train(n_val, "val-combos");
  const std::vector<int> test_combos = draw_from_train(n_test, "test-combos");

  DatasetManifest dataset;
  dataset.vocabulary = toy_vocabulary();
  auto scene_rng = rng.fork("scenes");
  int next_id = 0;
  auto emit = [&](const std::vector<int>& split_combos, const char* split) {
    for (int combo : split_combos) {
      const int color_idx = combo % static_cast<int>(kColors.size());
      const int shape_idx =
          (combo / static_cast<int>(kColors.size())) % static_cast<int>(kShapes.size());
      const int pos = combo / static_cast<int>(kColors.size() * kShapes.size());
      const int row_idx = pos / 3;
      const int col_idx = pos % 3;

      ManifestEntry entry;
      entry.example_id = entry_id(next_id++);
      entry.image_ref = "images/" + entry.example_id + ".tde";
      const double bg_shade = scene_rng.uniform(0.62, 0.82);
      entry.image = render_scene(color_idx, shape_idx, row_idx, col_idx, bg_shade);
      entry.captions = make_captions(color_idx, shape_idx, row_idx, col_idx, scene_rng);
      entry.split = split;
      dataset.entries.push_back(std::move(entry));
    }
  };
  emit(train_combos, "train");
  emit(val_combos, "val");
  emit(test_combos, "test");
  return dataset;
}

void save_dataset(const DatasetManifest& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  std::filesystem::create_directories(dir / "previews");

  std::ofstream out(dir / "manifest.jsonl", std::ios::trunc);
  if (!out) {
    throw ManifestError("cannot write manifest under " + dir.string());
  }
  json header;
  header["version"] = 1;
  header["vocabulary"] = dataset.vocabulary.words();
  out << header.dump() << "\n";

  for (const auto& entry : dataset.entries) {
    json line;
    line["example_id"] = entry.example_id;
    line["image"] = entry.image_ref;
    line["split"] = entry.split;
    json captions = json::array();
    for (const auto& c : entry.captions) captions.push_back(caption_to_json(c));
    line["captions"] = captions;
    out << line.dump() << "\n";

    const auto& shape = entry.image.shape();
    Container container;
    container.tag = "image:" + entry.example_id;
    container.arrays.push_back(ArrayF64{{static_cast<std::uint64_t>(shape.height),
                                         static_cast<std::uint64_t>(shape.width),
                                         static_cast<std::uint64_t>(shape.channels)},
                                        entry.image.pixels()});
    write_container(dir / entry.image_ref, container);
    write_png_preview(dir / "previews" / (entry.example_id + ".png"), entry.image);
  }
}

ImageTensor load_image_container(const std::filesystem::path& path) {
  const Container container = read_container(path);
  if (container.arrays.size() != 1 || container.arrays[0].dims.size() != 3) {
    throw ContainerError("image container must hold one rank-3 array: " + path.string());
  }
  const auto& a = container.arrays[0];
  const ImageShape shape{static_cast<int>(a.dims[0]), static_cast<int>(a.dims[1]),
                         static_cast<int>(a.dims[2])};
  return ImageTensor(shape, a.data);
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  const std::filesystem::path manifest_path =
      std::filesystem::is_directory(path) ? path / "manifest.jsonl" : path;
  const std::filesystem::path root = manifest_path.parent_path();
  std::ifstream in(manifest_path);
  if (!in) {
    throw ManifestError("cannot open manifest: " + manifest_path.string());
  }

  DatasetManifest dataset;
  std::string text;
  int line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ManifestError("manifest line " + std::to_string(line_no) +
                          ": invalid JSON: " + e.what());
    }
    if (line_no == 1) {
      if (!j.contains("vocabulary") || !j["vocabulary"].is_array()) {
        throw ManifestError("manifest line 1: field 'vocabulary' missing or not an array");
      }
      dataset.vocabulary = Vocabulary(j["vocabulary"].get<std::vector<std::string>>());
      continue;
    }
    ManifestEntry entry;
    for (const char* field : {"example_id", "image", "split", "captions"}) {
      if (!j.contains(field)) {
        throw ManifestError("manifest line " + std::to_string(line_no) + ": field '" +
                            field + "' missing");
      }
    }
    entry.example_id = j["example_id"].get<std::string>();
    entry.image_ref = j["image"].get<std::string>();
    entry.split = j["split"].get<std::string>();
    for (const auto& c : j["captions"]) {
      entry.captions.push_back(caption_from_json(c, line_no, "captions"));
    }
    if (entry.captions.empty()) {
      throw ManifestError("manifest line " + std::to_string(line_no) +
                          ": entry has no captions");
    }
    if (dataset.find(entry.example_id) != nullptr) {
      throw ManifestError("manifest: duplicate example_id " + entry.example_id);
    }
    const auto image_path = root / entry.image_ref;
    if (!std::filesystem::exists(image_path)) {
      throw ManifestError("manifest: missing image for " + entry.example_id + ": " +
                          image_path.string());
    }
    entry.image = load_image_container(image_path);
    if (!entry.image.in_unit_range()) {
      throw ManifestError("manifest: image for " + entry.example_id +
                          " has pixels outside [0, 1]");
    }
    dataset.entries.push_back(std::move(entry));
  }
  if (dataset.vocabulary.size() == 0) {
    throw ManifestError("manifest: empty or missing header line");
  }
  return dataset;
}

}  // namespace ird
