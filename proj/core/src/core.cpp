#include "smpi/core.hpp"

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/LU>

namespace smpi {
namespace {

// A vector that already came out of a normalization has a computed norm
// within a few ulp of one; leaving it untouched keeps normalization
// idempotent.
constexpr double kUnitNormSlack = 1e-14;

}  // namespace

Plane normalize_plane(const Vec3& raw_normal, double raw_offset) {
  const double norm = raw_normal.norm();
  if (!(norm > 1e-12) || !std::isfinite(norm) || !std::isfinite(raw_offset)) {
    throw Error(ErrorCode::kZeroNormal, "plane normal has (near) zero or non-finite length");
  }
  Vec3 n = raw_normal;
  double d = raw_offset;
  if (std::abs(norm - 1.0) > kUnitNormSlack) {
    n /= norm;
    d /= norm;
  }

  bool flip = d < 0.0;
  if (d == 0.0) {
    d = 0.0;  // drops a negative zero
    for (int i = 0; i < 3; ++i) {
      if (n[i] != 0.0) {
        flip = n[i] < 0.0;
        break;
      }
    }
  }
  if (flip) {
    n = -n;
    d = -d;
  }
  // -(-0.0) style artifacts in the normal are harmless but make equality
  // comparisons surprising.
  for (int i = 0; i < 3; ++i) {
    if (n[i] == 0.0) n[i] = 0.0;
  }
  return Plane(n, d);
}

Mat3 Intrinsics::matrix() const {
  Mat3 k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

bool RigidTransform::is_valid(double tolerance) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const Mat3 gram = rotation.transpose() * rotation;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tolerance) return false;
  return std::abs(rotation.determinant() - 1.0) <= tolerance;
}

RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

Camera::Camera(const Intrinsics& intrinsics, const RigidTransform& pose, Resolution resolution)
    : intrinsics_(intrinsics), pose_(pose), resolution_(resolution) {
  if (!(intrinsics.fx > 0.0) || !(intrinsics.fy > 0.0) || !std::isfinite(intrinsics.fx) ||
      !std::isfinite(intrinsics.fy) || !std::isfinite(intrinsics.cx) ||
      !std::isfinite(intrinsics.cy)) {
    throw Error(ErrorCode::kInvalidCamera, "focal lengths must be positive and finite");
  }
  if (!pose.is_valid()) {
    throw Error(ErrorCode::kInvalidCamera, "pose rotation is not a proper rotation");
  }
  if (resolution.height < 0 || resolution.width < 0) {
    throw Error(ErrorCode::kInvalidCamera, "negative resolution");
  }
}

RigidTransform relative_transform(const Camera& from, const Camera& to) {
  return to.pose() * from.pose().inverse();
}

Proxy::Proxy(const Plane& plane, StructureClass structure, Raster<Rgb> color,
             Raster<float> alpha, float mask_threshold)
    : plane_(plane),
      structure_(structure),
      layer_{std::move(color), std::move(alpha)},
      mask_threshold_(mask_threshold) {
  if (!same_shape(layer_.color, layer_.alpha)) {
    throw Error(ErrorCode::kDimensionMismatch, "proxy color and alpha differ in size");
  }
  if (!(mask_threshold >= 0.0F && mask_threshold <= 1.0F)) {
    throw Error(ErrorCode::kInvalidArgument, "mask threshold must lie in [0, 1]");
  }
  mask_ = Mask(layer_.alpha.resolution(), 0);
  const auto alpha_px = layer_.alpha.pixels();
  const auto mask_px = mask_.pixels();
  for (std::size_t i = 0; i < alpha_px.size(); ++i) {
    const float a = alpha_px[i];
    if (!(a >= 0.0F && a <= 1.0F)) {
      throw Error(ErrorCode::kInvalidArgument, "proxy alpha outside [0, 1]");
    }
    mask_px[i] = a >= mask_threshold ? 1 : 0;
  }
}

SMPI::SMPI(std::vector<Proxy> proxies, const Camera& reference_camera)
    : proxies_(std::move(proxies)), reference_camera_(reference_camera) {
  bool seen_nonplanar = false;
  const Mat3& rotation = reference_camera_.pose().rotation;
  for (std::size_t i = 0; i < proxies_.size(); ++i) {
    const Proxy& p = proxies_[i];
    if (p.resolution() != reference_camera_.resolution()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "proxy " + std::to_string(i) + " does not match the reference resolution");
    }
    if (p.structure() == StructureClass::kPlanar) {
      if (seen_nonplanar) {
        throw Error(ErrorCode::kInvalidArgument,
                    "planar proxy " + std::to_string(i) + " follows a non-planar proxy");
      }
      ++num_planar_;
    } else {
      seen_nonplanar = true;
      const Vec3 n_ref = rotation * p.plane().normal();
      if ((n_ref - kFrontoParallelNormal).cwiseAbs().maxCoeff() > 1e-9) {
        throw Error(ErrorCode::kInvalidArgument,
                    "non-planar proxy " + std::to_string(i) +
                        " is not fronto-parallel in the reference frame");
      }
    }
  }
}

}  // namespace smpi
