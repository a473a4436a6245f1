#pragma once

#include <cstddef>
#include <span>

#include "smpi/core.hpp"

namespace smpi {

/// Pixels whose summed confidence does not exceed this are holes.
inline constexpr double kHoleEpsilon = 1e-6;

struct MergedView {
  /// Confidence channel holds the per-pixel maximum input confidence.
  ImageBuffer image;
  Mask holes;
  std::size_t hole_count = 0;
};

/// Confidence-weighted average of renders of the same target view:
/// color = sum_t conf_t color_t / sum_t conf_t. Throws Error(kEmptyInput)
/// or Error(kDimensionMismatch).
[[nodiscard]] MergedView merge_views(std::span<const ImageBuffer> renders);

/// Number of pixels with confidence <= kHoleEpsilon.
[[nodiscard]] std::size_t count_holes(const ImageBuffer& render);

}  // namespace smpi
