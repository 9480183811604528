#include "ird/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace ird {

void write_png_preview(const std::filesystem::path& path, const ImageTensor& image) {
  const auto& shape = image.shape();
  if (shape.channels != 1 && shape.channels != 3) {
    throw std::invalid_argument("write_png_preview: expects 1 or 3 channels");
  }

  std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.c_str(), "wb"),
                                                     &std::fclose);
  if (!fp) {
    throw std::runtime_error("write_png_preview: cannot open " + path.string());
  }

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("write_png_preview: png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("write_png_preview: png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("write_png_preview: libpng error writing " + path.string());
  }

  png_init_io(png, fp.get());
  const int color_type = shape.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
  png_set_IHDR(png, info, static_cast<png_uint_32>(shape.width),
               static_cast<png_uint_32>(shape.height), 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_byte> row(static_cast<std::size_t>(shape.width) * shape.channels);
  const auto& pixels = image.pixels();
  for (int y = 0; y < shape.height; ++y) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      const double p = pixels[static_cast<std::size_t>(y) * row.size() + i];
      row[i] = static_cast<png_byte>(std::llround(std::clamp(p, 0.0, 1.0) * 255.0));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace ird
