#include "png_codec.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

#include <png.h>

#include "smpi/error.hpp"

namespace smpi::detail {
namespace {

std::uint32_t format_for(int channels) {
  switch (channels) {
    case 1: return PNG_FORMAT_GRAY;
    case 3: return PNG_FORMAT_RGB;
    case 4: return PNG_FORMAT_RGBA;
    default: throw Error(ErrorCode::kInvalidArgument, "unsupported channel count");
  }
}

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

void write_png8(const std::filesystem::path& path, const Image8& image) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = format_for(image.channels);
  if (!png_image_write_to_file(&png, path.c_str(), 0, image.data.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw Error(ErrorCode::kIo, "writing " + path.string() + ": " + msg);
  }
}

Image8 read_png8(const std::filesystem::path& path, int channels) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw Error(ErrorCode::kIo, "reading " + path.string() + ": " + msg);
  }
  png.format = format_for(channels);
  Image8 out;
  out.width = static_cast<int>(png.width);
  out.height = static_cast<int>(png.height);
  out.channels = channels;
  out.data.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, out.data.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw Error(ErrorCode::kIo, "decoding " + path.string() + ": " + msg);
  }
  return out;
}

void write_png16_gray(const std::filesystem::path& path, const Image16& image) {
  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::kIo, "libpng initialization failed");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
  for (int r = 0; r < image.height; ++r) {
    rows[r] = reinterpret_cast<png_bytep>(
        const_cast<std::uint16_t*>(image.data.data() + static_cast<std::size_t>(r) * image.width));
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIo, "writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_set_swap(png);  // PNG is big-endian; samples are host (little-endian) order
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image16 read_png16_gray(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::kIo, "libpng initialization failed");
  }
  Image16 out;
  std::vector<png_bytep> rows;
  volatile bool wrong_format = false;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kIo, "decoding " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  if (png_get_bit_depth(png, info) != 16 || png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY ||
      png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) {
    wrong_format = true;
  } else {
    png_set_swap(png);
    png_read_update_info(png, info);
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.data.resize(static_cast<std::size_t>(out.width) * out.height);
    rows.resize(static_cast<std::size_t>(out.height));
    for (int r = 0; r < out.height; ++r) {
      rows[r] = reinterpret_cast<png_bytep>(out.data.data() + static_cast<std::size_t>(r) * out.width);
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (wrong_format) {
    throw Error(ErrorCode::kUnsupportedFormat, path.string() + " is not a 16-bit grayscale PNG");
  }
  return out;
}

}  // namespace smpi::detail
