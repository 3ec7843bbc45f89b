#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "facemt/image.hpp"

namespace facemt {

/// Decodes any PNG libpng understands into 8-bit RGB (alpha is dropped,
/// gray is expanded). Failures throw ImageIoError naming the path and cause.
Image read_png(const std::filesystem::path& path);

/// Writes 8-bit RGB without alpha, creating parent directories as needed.
void write_png(const std::filesystem::path& path, const Image& image);

std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(const std::vector<std::uint8_t>& bytes);

}  // namespace facemt
