#include "masklift/png_io.hpp"

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

#include <png.h>

#include "masklift/error.hpp"

namespace masklift {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return f;
}

}  // namespace

GrayImage read_png_gray(const std::filesystem::path& path) {
  auto file = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorCode::kParse, path.string() + " is not a PNG file");
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kIo, "libpng initialisation failed");
  }

  GrayImage image;
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kParse, "corrupt PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const auto color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY || (depth != 8 && depth != 16 && depth > 8)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kParse, path.string() + " is not a single-channel 8/16-bit PNG");
  }
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (depth == 16) png_set_swap(png);  // PNG is big-endian on disk
  png_read_update_info(png, info);

  image.width = static_cast<int>(png_get_image_width(png, info));
  image.height = static_cast<int>(png_get_image_height(png, info));
  image.bit_depth = depth == 16 ? 16 : 8;
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  buffer.resize(row_bytes * static_cast<std::size_t>(image.height));
  rows.resize(static_cast<std::size_t>(image.height));
  for (int y = 0; y < image.height; ++y) rows[y] = buffer.data() + row_bytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  image.pixels.resize(n);
  if (image.bit_depth == 16) {
    for (int y = 0; y < image.height; ++y) {
      const auto* src = reinterpret_cast<const std::uint16_t*>(rows[y]);
      std::copy(src, src + image.width, image.pixels.begin() + std::size_t(y) * image.width);
    }
  } else {
    for (int y = 0; y < image.height; ++y) {
      std::copy(rows[y], rows[y] + image.width,
                image.pixels.begin() + std::size_t(y) * image.width);
    }
  }
  return image;
}

void write_png_gray(const std::filesystem::path& path, const GrayImage& image) {
  if (image.bit_depth != 8 && image.bit_depth != 16) {
    throw Error(ErrorCode::kIo, "PNG writer supports 8 and 16 bit grayscale only");
  }
  if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw Error(ErrorCode::kIo, "image buffer does not match its dimensions");
  }
  auto file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIo, "libpng initialisation failed");
  }

  const int bytes = image.bit_depth / 8;
  const std::size_t row_bytes = static_cast<std::size_t>(image.width) * bytes;
  std::vector<std::uint8_t> row(row_bytes);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIo, "failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), image.bit_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const std::uint16_t value = image.pixels[std::size_t(y) * image.width + x];
      if (bytes == 2) {
        row[2 * x] = static_cast<std::uint8_t>(value >> 8);
        row[2 * x + 1] = static_cast<std::uint8_t>(value & 0xff);
      } else {
        row[x] = static_cast<std::uint8_t>(std::min<std::uint16_t>(value, 255));
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace masklift
