#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace ird {

/// Malformed or truncated container file.
struct ContainerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ArrayF64 {
  std::vector<std::uint64_t> dims;
  std::vector<double> data;

  std::uint64_t element_count() const;
};

/// Little-endian float64 array container shared by model checkpoints,
/// dataset images, and adversarial image files.
///
/// Layout: magic "TDE1"; u32 tag length + UTF-8 tag; then per array:
/// u32 rank, rank x u64 dims, element-count x f64 payload. Arrays run to
/// end of file. Round trips are bit-exact.
struct Container {
  std::string tag;
  std::vector<ArrayF64> arrays;
};

void write_container(const std::filesystem::path& path, const Container& container);
Container read_container(const std::filesystem::path& path);

}  // namespace ird
