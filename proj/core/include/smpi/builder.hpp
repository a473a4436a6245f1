#pragma once

#include <span>
#include <vector>

#include "smpi/core.hpp"

namespace smpi {

struct PlaneFit {
  Plane plane;
  double rms_residual = 0.0;
};

/// Total least-squares plane through `points`: centroid plus the scatter
/// eigenvector of the smallest eigenvalue. Throws Error(kDegenerate) for
/// fewer than three points or collinear/coincident input.
[[nodiscard]] PlaneFit fit_plane(std::span<const Vec3> points);

/// Ground truth for one view: image, metric depth, disjoint planar masks.
struct SceneGT {
  Raster<Rgb> image;
  DepthMap depth;
  std::vector<Mask> plane_masks;
  Camera camera;
};

/// Throws Error(kDimensionMismatch) or Error(kInvalidArgument) when masks
/// overlap, leave the valid-depth region or rasters disagree in size.
void validate(const SceneGT& gt);

enum class DepthBinning { kUniformDepth, kUniformDisparity };

struct BuildOptions {
  int nonplanar_layers = 8;
  float mask_threshold = kDefaultMaskThreshold;
  DepthBinning binning = DepthBinning::kUniformDepth;
  /// Softens the innermost mask ring of planar proxies.
  bool feather = false;
};

struct BuildResult {
  SMPI smpi;
  /// RMS point-to-plane distance of each planar fit, in proxy order.
  std::vector<double> fit_residuals;
  /// Reference-frame depth of each non-planar proxy, nearest first.
  std::vector<double> nonplanar_depths;
};

/// Builds an S-MPI from ground truth: one planar proxy per mask, plus
/// `nonplanar_layers` fronto-parallel proxies binning the remaining valid
/// pixels over their depth range (none if no pixel remains).
/// Throws Error(kEmptyScene) when the depth map has no valid pixel.
[[nodiscard]] BuildResult build_smpi(const SceneGT& gt, const BuildOptions& options = {});

}  // namespace smpi
