#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "smpi/core.hpp"

namespace smpi {

/// Per-proxy depth marker for pixels where the plane is not visible.
inline constexpr double kInvisibleDepth = 0.0;
/// Rendered depth is invalid where the accumulated confidence is below this.
inline constexpr float kMinDepthConfidence = 1e-3F;

/// Per-pixel back-to-front proxy order together with the per-proxy depths it
/// was derived from. Visible proxies come first in descending depth (ties by
/// ascending proxy index), invisible ones last in index order.
class PixelOrdering {
 public:
  PixelOrdering(Resolution resolution, std::size_t num_proxies);

  [[nodiscard]] Resolution resolution() const noexcept { return resolution_; }
  [[nodiscard]] std::size_t num_proxies() const noexcept { return num_proxies_; }

  [[nodiscard]] std::span<const std::uint32_t> order(int row, int col) const noexcept {
    return {order_.data() + offset(row, col), num_proxies_};
  }
  [[nodiscard]] std::span<std::uint32_t> order(int row, int col) noexcept {
    return {order_.data() + offset(row, col), num_proxies_};
  }
  /// Depths indexed by proxy (not by order position).
  [[nodiscard]] std::span<const double> depths(int row, int col) const noexcept {
    return {depths_.data() + offset(row, col), num_proxies_};
  }
  [[nodiscard]] std::span<double> depths(int row, int col) noexcept {
    return {depths_.data() + offset(row, col), num_proxies_};
  }

  friend bool operator==(const PixelOrdering&, const PixelOrdering&) = default;

 private:
  [[nodiscard]] std::size_t offset(int row, int col) const noexcept {
    return (static_cast<std::size_t>(row) * resolution_.width + col) * num_proxies_;
  }

  Resolution resolution_;
  std::size_t num_proxies_;
  std::vector<std::uint32_t> order_;
  std::vector<double> depths_;
};

/// Fills `order` with the back-to-front permutation for the given per-proxy
/// depths (kInvisibleDepth or any non-positive value marks invisibility).
void sort_back_to_front(std::span<const double> depths, std::span<std::uint32_t> order) noexcept;

/// Per-pixel ordering of the SMPI's planes as seen by `camera`.
[[nodiscard]] PixelOrdering compute_ordering(const SMPI& smpi, const Camera& camera);

struct RgbaSample {
  Rgb color;
  float alpha = 0.0F;
};

/// Bilinear lookup at continuous pixel coordinates. Interpolation happens on
/// premultiplied color, so transparent texels never bleed into the result;
/// taps outside the canvas count as fully transparent.
[[nodiscard]] RgbaSample sample_bilinear(const RgbaLayer& layer, double x, double y) noexcept;
[[nodiscard]] RgbaSample sample_bilinear(const Raster<Rgb>& color, const Raster<float>& alpha,
                                         double x, double y) noexcept;

/// Inverse-homography warp of every proxy layer into `target`'s image.
/// Proxies whose plane is degenerate for the warp come out fully transparent.
[[nodiscard]] std::vector<RgbaLayer> warp_layers(const SMPI& smpi, const Camera& target);

/// Back-to-front over-compositing of `layers` in the per-pixel order.
/// Throws Error(kDimensionMismatch) when layer count or size disagrees with
/// the ordering.
[[nodiscard]] ImageBuffer composite(const PixelOrdering& ordering,
                                    std::span<const RgbaLayer> layers);

/// Alpha-blended depth using the ordering's per-proxy plane depths.
[[nodiscard]] DepthMap composite_depth(const PixelOrdering& ordering,
                                       std::span<const RgbaLayer> layers);

struct RenderedView {
  ImageBuffer image;
  DepthMap depth;
};

/// Full novel-view pipeline: planes into the target frame, per-proxy warp,
/// per-pixel ordering, compositing of color and depth. Equivalent to
/// composite(compute_ordering(..), warp_layers(..)) but fused per pixel.
[[nodiscard]] RenderedView render_novel_view(const SMPI& smpi, const Camera& target);

[[nodiscard]] DepthMap render_depth(const SMPI& smpi, const Camera& camera);

/// Classic fronto-parallel MPI layer at `depth` in the reference frame.
struct MpiLayer {
  Raster<Rgb> color;
  Raster<float> alpha;
  double depth = 1.0;
};

/// Standard MPI renderer with a single global layer order. Layers must be
/// given nearest first with strictly increasing depth, otherwise
/// Error(kNonMonotoneDepths).
[[nodiscard]] ImageBuffer render_standard_mpi(std::span<const MpiLayer> layers,
                                              const Camera& reference, const Camera& target);

/// The same layers as an SMPI of non-planar (fronto-parallel) proxies.
[[nodiscard]] SMPI to_smpi(std::span<const MpiLayer> layers, const Camera& reference);

}  // namespace smpi
