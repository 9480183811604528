#pragma once

#include <filesystem>

#include "ird/core.hpp"

namespace ird {

/// 8-bit PNG preview of a float image. Values are clamped to [0, 1] and
/// quantized; the preview is lossy and never read back.
void write_png_preview(const std::filesystem::path& path, const ImageTensor& image);

}  // namespace ird
