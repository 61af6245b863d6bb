#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace masklift {

/// Single-channel image. 8-bit files load with values 0..255.
struct GrayImage {
  int width = 0;
  int height = 0;
  int bit_depth = 16;
  std::vector<std::uint16_t> pixels;
};

/// Reads an 8- or 16-bit grayscale PNG. Throws kIo / kParse.
GrayImage read_png_gray(const std::filesystem::path& path);

/// Writes a grayscale PNG at image.bit_depth (8 or 16). Throws kIo.
void write_png_gray(const std::filesystem::path& path, const GrayImage& image);

}  // namespace masklift
