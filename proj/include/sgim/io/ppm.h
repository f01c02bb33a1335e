#pragma once

#include <cstdint>
#include <filesystem>

#include "sgim/image.h"

namespace sgim::io {

// Binary P6, maxval 255. Values in [-1, 1] map to round((x + 1) * 127.5),
// clamped to the byte range.
void write_ppm(const std::filesystem::path& path, const Image& image);
// Inverse map v / 127.5 - 1.
Image read_ppm(const std::filesystem::path& path);

std::uint8_t to_byte(float x);

}  // namespace sgim::io
