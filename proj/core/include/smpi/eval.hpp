#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "smpi/core.hpp"

namespace smpi {

/// Returned by psnr() for identical inputs, and the upper clamp otherwise.
inline constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / MSE) over all pixels and channels (unit peak).
[[nodiscard]] double psnr(const Raster<Rgb>& pred, const Raster<Rgb>& gt);
/// Same, restricted to pixels where `mask` is set. Throws Error(kEmptyMask)
/// when the mask selects nothing.
[[nodiscard]] double psnr(const Raster<Rgb>& pred, const Raster<Rgb>& gt, const Mask& mask);

/// Mean SSIM over valid 11x11 Gaussian windows (sigma 1.5) of the luma
/// 0.299 R + 0.587 G + 0.114 B, C1 = 0.01^2, C2 = 0.03^2.
/// Throws Error(kImageTooSmall) below 11 pixels on either side.
[[nodiscard]] double ssim(const Raster<Rgb>& pred, const Raster<Rgb>& gt);

struct DepthMetrics {
  double rel = 0.0;
  double log10 = 0.0;
  double rmse = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  std::size_t count = 0;
};

/// Standard depth errors over pixels valid in both maps. The threshold
/// accuracies use a strict max(p/g, g/p) < 1.25^k. Throws Error(kNoOverlap).
[[nodiscard]] DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt);

/// A detected or ground-truth plane: its support and its camera-frame plane.
struct PlaneInstance {
  Mask mask;
  Plane plane;
};

struct RecallCurve {
  std::vector<double> thresholds;  // meters
  std::vector<double> recall;
};

/// 0, 0.05, ..., 0.8 m.
[[nodiscard]] std::vector<double> default_recall_thresholds();

/// Per-plane recall. Predictions are matched one-to-one to ground truth
/// greedily by descending mask IoU among pairs with IoU >= iou_threshold
/// (ties by ground-truth then prediction index). A matched ground-truth plane
/// counts at threshold tau when the mean |depth difference| of the two planes
/// over the mask intersection is <= tau.
[[nodiscard]] RecallCurve plane_recall(std::span<const PlaneInstance> pred,
                                       std::span<const PlaneInstance> gt,
                                       const Intrinsics& intrinsics,
                                       std::span<const double> depth_thresholds,
                                       double iou_threshold = 0.5);

struct SegmentationMetrics {
  double vi = 0.0;  // natural log
  double ri = 0.0;
  double sc = 0.0;
};

[[nodiscard]] SegmentationMetrics segmentation_metrics(const LabelRaster& pred,
                                                       const LabelRaster& gt);

/// Planar proxies of `smpi` with planes expressed in its reference frame.
[[nodiscard]] std::vector<PlaneInstance> plane_instances(const SMPI& smpi);

/// Index of the planar proxy owning each pixel, -1 elsewhere.
[[nodiscard]] LabelRaster plane_labels(const SMPI& smpi);

}  // namespace smpi
