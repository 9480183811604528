#include "ird/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

namespace ird {

namespace {

constexpr char kMagic[4] = {'T', 'D', 'E', '1'};
constexpr std::uint64_t kMaxElements = 1ull << 30;

static_assert(std::endian::native == std::endian::little,
              "container io assumes a little-endian host");
static_assert(sizeof(double) == 8 && std::numeric_limits<double>::is_iec559);

template <typename T>
void write_raw(std::ofstream& out, const T* values, std::size_t count) {
  out.write(reinterpret_cast<const char*>(values),
            static_cast<std::streamsize>(count * sizeof(T)));
}

template <typename T>
void read_raw(std::ifstream& in, T* values, std::size_t count, const std::string& what) {
  in.read(reinterpret_cast<char*>(values), static_cast<std::streamsize>(count * sizeof(T)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(T)) {
    throw ContainerError("container: truncated " + what);
  }
}

}  // namespace

std::uint64_t ArrayF64::element_count() const {
  std::uint64_t n = 1;
  for (auto d : dims) {
    if (d == 0 || n > kMaxElements / d) {
      throw ContainerError("container: array dimensions out of range");
    }
    n *= d;
  }
  return n;
}

void write_container(const std::filesystem::path& path, const Container& container) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ContainerError("container: cannot open for write: " + path.string());
  }
  out.write(kMagic, sizeof(kMagic));
  const auto tag_len = static_cast<std::uint32_t>(container.tag.size());
  write_raw(out, &tag_len, 1);
  out.write(container.tag.data(), static_cast<std::streamsize>(container.tag.size()));
  for (const auto& array : container.arrays) {
    if (array.element_count() != array.data.size()) {
      throw ContainerError("container: array data does not match dims");
    }
    const auto rank = static_cast<std::uint32_t>(array.dims.size());
    write_raw(out, &rank, 1);
    write_raw(out, array.dims.data(), array.dims.size());
    write_raw(out, array.data.data(), array.data.size());
  }
  if (!out) {
    throw ContainerError("container: write failed: " + path.string());
  }
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ContainerError("container: cannot open: " + path.string());
  }
  char magic[4];
  read_raw(in, magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw ContainerError("container: bad magic in " + path.string());
  }
  std::uint32_t tag_len = 0;
  read_raw(in, &tag_len, 1, "tag length");
  if (tag_len > (1u << 16)) {
    throw ContainerError("container: tag length out of range");
  }
  Container container;
  container.tag.resize(tag_len);
  if (tag_len > 0) read_raw(in, container.tag.data(), tag_len, "tag");

  while (true) {
    std::uint32_t rank = 0;
    in.read(reinterpret_cast<char*>(&rank), sizeof(rank));
    if (in.gcount() == 0 && in.eof()) break;  // clean end of file
    if (static_cast<std::size_t>(in.gcount()) != sizeof(rank)) {
      throw ContainerError("container: truncated array header");
    }
    if (rank > 8) {
      throw ContainerError("container: array rank out of range");
    }
    ArrayF64 array;
    array.dims.resize(rank);
    read_raw(in, array.dims.data(), rank, "array dims");
    const std::uint64_t n = array.element_count();
    array.data.resize(n);
    read_raw(in, array.data.data(), n, "float payload");
    container.arrays.push_back(std::move(array));
  }
  return container;
}

}  // namespace ird
