#include "smpi/builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "smpi/geometry.hpp"

namespace smpi {

PlaneFit fit_plane(std::span<const Vec3> points) {
  if (points.size() < 3) {
    throw Error(ErrorCode::kDegenerate, "plane fit needs at least three points");
  }
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  Mat3 scatter = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 q = p - centroid;
    scatter.noalias() += q * q.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> solver(scatter);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kDegenerate, "scatter eigendecomposition failed");
  }
  const Vec3 eig = solver.eigenvalues();  // ascending
  const double scale = std::max(eig[2], std::numeric_limits<double>::min());
  const bool coincident = eig[2] <= 1e-24;
  const bool collinear = eig[1] <= 1e-12 * scale;
  const bool ambiguous = eig[1] > 0.0 && eig[0] / eig[1] > 0.99;
  if (coincident || collinear || ambiguous) {
    throw Error(ErrorCode::kDegenerate, "points do not span a unique plane");
  }

  const Vec3 normal = solver.eigenvectors().col(0);
  const Plane plane = normalize_plane(normal, normal.dot(centroid));
  double sq = 0.0;
  for (const Vec3& p : points) {
    const double r = plane.signed_distance(p);
    sq += r * r;
  }
  return PlaneFit{plane, std::sqrt(sq / static_cast<double>(points.size()))};
}

void validate(const SceneGT& gt) {
  const Resolution res = gt.camera.resolution();
  if (gt.image.resolution() != res || gt.depth.depth.resolution() != res) {
    throw Error(ErrorCode::kDimensionMismatch, "image/depth do not match the camera");
  }
  Mask claimed(res, 0);
  for (std::size_t m = 0; m < gt.plane_masks.size(); ++m) {
    const Mask& mask = gt.plane_masks[m];
    if (mask.resolution() != res) {
      throw Error(ErrorCode::kDimensionMismatch, "mask " + std::to_string(m) + " has wrong size");
    }
    const auto px = mask.pixels();
    const auto depth = gt.depth.depth.pixels();
    const auto owner = claimed.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
      if (!px[i]) continue;
      if (!DepthMap::is_valid(depth[i])) {
        throw Error(ErrorCode::kInvalidArgument,
                    "mask " + std::to_string(m) + " covers a pixel without valid depth");
      }
      if (owner[i]) {
        throw Error(ErrorCode::kInvalidArgument,
                    "mask " + std::to_string(m) + " overlaps an earlier mask");
      }
      owner[i] = 1;
    }
  }
}

namespace {

Raster<float> feathered_alpha(const Mask& mask, float inner_ring_alpha) {
  Raster<float> alpha(mask.resolution(), 0.0F);
  const int h = mask.height();
  const int w = mask.width();
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask(r, c)) continue;
      const bool edge = (r == 0 || !mask(r - 1, c)) || (r + 1 == h || !mask(r + 1, c)) ||
                        (c == 0 || !mask(r, c - 1)) || (c + 1 == w || !mask(r, c + 1));
      alpha(r, c) = edge ? inner_ring_alpha : 1.0F;
    }
  }
  return alpha;
}

}  // namespace

BuildResult build_smpi(const SceneGT& gt, const BuildOptions& options) {
  validate(gt);
  if (options.nonplanar_layers < 1) {
    throw Error(ErrorCode::kInvalidArgument, "nonplanar_layers must be at least 1");
  }
  const Resolution res = gt.camera.resolution();
  const Intrinsics& k = gt.camera.intrinsics();
  const RigidTransform cam_to_world = gt.camera.pose().inverse();
  const auto& depth = gt.depth.depth;

  bool any_valid = false;
  for (const double d : depth.pixels()) any_valid = any_valid || DepthMap::is_valid(d);
  if (!any_valid) throw Error(ErrorCode::kEmptyScene, "depth map has no valid pixel");

  std::vector<Proxy> proxies;
  std::vector<double> residuals;
  Mask covered(res, 0);
  const float ring_alpha = 0.5F * (1.0F + options.mask_threshold);

  for (const Mask& mask : gt.plane_masks) {
    std::vector<Vec3> points;
    Raster<Rgb> color(res);
    for (int r = 0; r < res.height; ++r) {
      for (int c = 0; c < res.width; ++c) {
        if (!mask(r, c)) continue;
        points.push_back(backproject(k, c, r, depth(r, c)));
        color(r, c) = gt.image(r, c);
        covered(r, c) = 1;
      }
    }
    const PlaneFit fit = fit_plane(points);
    residuals.push_back(fit.rms_residual);
    Raster<float> alpha = options.feather ? feathered_alpha(mask, ring_alpha) : Raster<float>(res);
    if (!options.feather) {
      for (std::size_t i = 0; i < alpha.size(); ++i) alpha.pixels()[i] = mask.pixels()[i] ? 1.0F : 0.0F;
    }
    proxies.emplace_back(transform_plane(fit.plane, cam_to_world), StructureClass::kPlanar,
                         std::move(color), std::move(alpha), options.mask_threshold);
  }

  // Remaining valid pixels go to depth bins.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < res.height; ++r) {
    for (int c = 0; c < res.width; ++c) {
      if (covered(r, c) || !DepthMap::is_valid(depth(r, c))) continue;
      lo = std::min(lo, depth(r, c));
      hi = std::max(hi, depth(r, c));
    }
  }

  std::vector<double> centers;
  if (lo <= hi) {
    const int bins = options.nonplanar_layers;
    const bool disparity = options.binning == DepthBinning::kUniformDisparity;
    // Work in a coordinate that grows with depth so bin 0 is the nearest.
    const auto to_coord = [&](double d) { return disparity ? -1.0 / d : d; };
    const auto from_coord = [&](double x) { return disparity ? -1.0 / x : x; };
    const double c0 = to_coord(lo);
    const double width = (to_coord(hi) - c0) / bins;
    for (int b = 0; b < bins; ++b) centers.push_back(from_coord(c0 + (b + 0.5) * width));

    std::vector<Raster<Rgb>> colors(bins, Raster<Rgb>(res));
    std::vector<Raster<float>> alphas(bins, Raster<float>(res, 0.0F));
    for (int r = 0; r < res.height; ++r) {
      for (int c = 0; c < res.width; ++c) {
        if (covered(r, c) || !DepthMap::is_valid(depth(r, c))) continue;
        int b = width > 0.0 ? static_cast<int>(std::floor((to_coord(depth(r, c)) - c0) / width)) : 0;
        b = std::clamp(b, 0, bins - 1);
        colors[b](r, c) = gt.image(r, c);
        alphas[b](r, c) = 1.0F;
      }
    }
    for (int b = 0; b < bins; ++b) {
      const Plane in_camera = normalize_plane(kFrontoParallelNormal, centers[b]);
      proxies.emplace_back(transform_plane(in_camera, cam_to_world), StructureClass::kNonPlanar,
                           std::move(colors[b]), std::move(alphas[b]), options.mask_threshold);
    }
  }

  return BuildResult{SMPI(std::move(proxies), gt.camera), std::move(residuals), std::move(centers)};
}

}  // namespace smpi
