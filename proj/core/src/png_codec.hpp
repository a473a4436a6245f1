#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace smpi::detail {

struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1, 3 or 4
  std::vector<std::uint8_t> data;
};

struct Image16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> data;
};

void write_png8(const std::filesystem::path& path, const Image8& image);
/// Decodes any PNG and converts it to `channels` 8-bit channels.
Image8 read_png8(const std::filesystem::path& path, int channels);

void write_png16_gray(const std::filesystem::path& path, const Image16& image);
/// Only single-channel 16-bit files are accepted.
Image16 read_png16_gray(const std::filesystem::path& path);

}  // namespace smpi::detail
