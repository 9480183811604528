#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "ird/container.hpp"
#include "ird/dataset.hpp"

using namespace ird;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_SUITE_BEGIN("data_io");

TEST_CASE("generation is deterministic per seed") {
  TempDir a("ird_ds_a"), b("ird_ds_b");
  save_dataset(generate_toy_dataset(24, 42), a.path);
  save_dataset(generate_toy_dataset(24, 42), b.path);
  CHECK(slurp(a.path / "manifest.jsonl") == slurp(b.path / "manifest.jsonl"));
  CHECK(slurp(a.path / "images/ex0007.tde") == slurp(b.path / "images/ex0007.tde"));

  const DatasetManifest other = generate_toy_dataset(24, 43);
  const DatasetManifest base = generate_toy_dataset(24, 42);
  bool any_diff = false;
  for (std::size_t i = 0; i < base.entries.size(); ++i) {
    any_diff = any_diff || !(base.entries[i].image == other.entries[i].image);
  }
  CHECK(any_diff);
}

TEST_CASE("generated structure: counts, caption arity, vocabulary closure") {
  const DatasetManifest ds = generate_toy_dataset(10, 7);
  CHECK(ds.entries.size() == 10);
  CHECK(ds.vocabulary.size() >= 30);
  for (const auto& e : ds.entries) {
    CHECK(e.captions.size() >= 3);
    CHECK(e.captions.size() <= 5);
    CHECK(e.image.in_unit_range());
    for (const auto& c : e.captions) {
      for (const auto& tok : c.tokens()) {
        CHECK(ds.vocabulary.contains(tok));
      }
    }
  }
  CHECK_THROWS_AS(generate_toy_dataset(9, 7), std::invalid_argument);
}

TEST_CASE("attribute tuples are unique within each split") {
  // so every caption identifies its entry inside any one retrieval gallery
  const DatasetManifest ds = generate_toy_dataset(200, 3);
  for (const char* split : {"train", "val", "test"}) {
    std::vector<std::vector<std::string>> attribute_words;
    for (const auto* e : ds.split(split)) {
      // template 0 fixes positions 1,2,5,6 as color/shape/row/col
      const auto& toks = e->captions.front().tokens();
      for (const auto& seen : attribute_words) {
        CHECK(seen != toks);
      }
      attribute_words.push_back(toks);
    }
  }
}

TEST_CASE("save then load round trips bit-exactly") {
  TempDir dir("ird_ds_rt");
  const DatasetManifest ds = generate_toy_dataset(16, 9);
  save_dataset(ds, dir.path);
  const DatasetManifest loaded = load_manifest(dir.path);
  REQUIRE(loaded.entries.size() == ds.entries.size());
  CHECK(loaded.vocabulary.words() == ds.vocabulary.words());
  for (std::size_t i = 0; i < ds.entries.size(); ++i) {
    CHECK(loaded.entries[i].example_id == ds.entries[i].example_id);
    CHECK(loaded.entries[i].split == ds.entries[i].split);
    CHECK(loaded.entries[i].image == ds.entries[i].image);
    REQUIRE(loaded.entries[i].captions.size() == ds.entries[i].captions.size());
    for (std::size_t j = 0; j < ds.entries[i].captions.size(); ++j) {
      CHECK(loaded.entries[i].captions[j] == ds.entries[i].captions[j]);
    }
  }
}

TEST_CASE("manifest with a duplicate example_id is rejected by name") {
  TempDir dir("ird_ds_dup");
  save_dataset(generate_toy_dataset(12, 1), dir.path);
  std::ifstream in(dir.path / "manifest.jsonl");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  in.close();
  std::ofstream out(dir.path / "manifest.jsonl", std::ios::app);
  out << first << "\n";  // duplicate the first entry line
  out.close();
  try {
    load_manifest(dir.path);
    FAIL("expected ManifestError");
  } catch (const ManifestError& e) {
    CHECK(std::string(e.what()).find("ex0000") != std::string::npos);
  }
}

TEST_CASE("missing image file is reported with the example id") {
  TempDir dir("ird_ds_missing");
  save_dataset(generate_toy_dataset(12, 2), dir.path);
  std::filesystem::remove(dir.path / "images/ex0003.tde");
  try {
    load_manifest(dir.path);
    FAIL("expected ManifestError");
  } catch (const ManifestError& e) {
    CHECK(std::string(e.what()).find("ex0003") != std::string::npos);
  }
}

TEST_CASE("malformed manifest line is reported with its line number") {
  TempDir dir("ird_ds_badline");
  save_dataset(generate_toy_dataset(12, 4), dir.path);
  std::ofstream out(dir.path / "manifest.jsonl", std::ios::app);
  out << "{not json}\n";
  out.close();
  try {
    load_manifest(dir.path);
    FAIL("expected ManifestError");
  } catch (const ManifestError& e) {
    CHECK(std::string(e.what()).find("line 14") != std::string::npos);
  }
}

TEST_CASE("container round trip and truncation detection") {
  TempDir dir("ird_container");
  const auto path = dir.path / "sample.tde";
  Container c;
  c.tag = "sample";
  c.arrays.push_back(ArrayF64{{2, 3}, {1.0, 2.5, -3.0, 0.0, 1e-300, 42.0}});
  c.arrays.push_back(ArrayF64{{4}, {9.0, 8.0, 7.0, 6.5}});
  write_container(path, c);
  const Container back = read_container(path);
  CHECK(back.tag == c.tag);
  REQUIRE(back.arrays.size() == 2);
  CHECK(back.arrays[0].dims == c.arrays[0].dims);
  CHECK(back.arrays[0].data == c.arrays[0].data);
  CHECK(back.arrays[1].data == c.arrays[1].data);

  // mutation: chop bytes off the float payload
  std::string bytes = slurp(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 5));
  out.close();
  CHECK_THROWS_AS(read_container(path), ContainerError);

  // mutation: bad magic
  bytes[0] = 'X';
  out.open(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  CHECK_THROWS_AS(read_container(path), ContainerError);
}

TEST_SUITE_END();
