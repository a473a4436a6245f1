#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "smpi/error.hpp"

namespace smpi {

struct Resolution {
  int height = 0;
  int width = 0;

  [[nodiscard]] std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  friend bool operator==(const Resolution&, const Resolution&) = default;
};

struct Rgb {
  float r = 0.0F;
  float g = 0.0F;
  float b = 0.0F;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Dense row-major raster with a top-left origin. Pixel (u, v) lives at
// row v, column u.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  explicit Raster(Resolution resolution, T fill = T{})
      : resolution_(resolution), data_(checked_count(resolution), fill) {}

  [[nodiscard]] Resolution resolution() const noexcept { return resolution_; }
  [[nodiscard]] int height() const noexcept { return resolution_.height; }
  [[nodiscard]] int width() const noexcept { return resolution_.width; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  T& operator()(int row, int col) noexcept {
    return data_[static_cast<std::size_t>(row) * resolution_.width + col];
  }
  const T& operator()(int row, int col) const noexcept {
    return data_[static_cast<std::size_t>(row) * resolution_.width + col];
  }

  [[nodiscard]] std::span<T> pixels() noexcept { return data_; }
  [[nodiscard]] std::span<const T> pixels() const noexcept { return data_; }
  [[nodiscard]] std::span<T> row(int r) noexcept {
    return std::span<T>(data_).subspan(static_cast<std::size_t>(r) * resolution_.width,
                                       resolution_.width);
  }
  [[nodiscard]] std::span<const T> row(int r) const noexcept {
    return std::span<const T>(data_).subspan(static_cast<std::size_t>(r) * resolution_.width,
                                             resolution_.width);
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  static std::size_t checked_count(Resolution r) {
    if (r.height < 0 || r.width < 0) {
      throw Error(ErrorCode::kInvalidArgument, "raster dimensions must be non-negative");
    }
    return r.pixel_count();
  }

  Resolution resolution_{};
  std::vector<T> data_;
};

using Mask = Raster<std::uint8_t>;
using LabelRaster = Raster<std::int32_t>;

template <typename A, typename B>
[[nodiscard]] bool same_shape(const Raster<A>& a, const Raster<B>& b) noexcept {
  return a.resolution() == b.resolution();
}

}  // namespace smpi
