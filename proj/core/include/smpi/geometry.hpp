#pragma once

#include <optional>

#include "smpi/core.hpp"

namespace smpi {

/// |n · K^-1 q| at or below this counts as an edge-on view of the plane.
inline constexpr double kGrazingEpsilon = 1e-9;
/// Planes closer than this to the optical center cannot induce a homography.
inline constexpr double kPlaneOffsetEpsilon = 1e-6;

/// Depth along the optical axis where the ray through pixel (u, v) meets the
/// plane, D = d / (n · K^-1 q). Empty when the plane is behind the camera or
/// seen edge-on at that pixel.
[[nodiscard]] std::optional<double> plane_depth(const Plane& plane, const Intrinsics& intrinsics,
                                                double u, double v) noexcept;

/// Re-expresses a plane after the rigid motion x' = R x + t:
/// n' = R n, d' = d + n' · t, then canonicalized.
[[nodiscard]] Plane transform_plane(const Plane& plane, const RigidTransform& src_to_tgt);

class Homography2D {
 public:
  /// Throws Error(kInvalidArgument) when |det| <= 1e-12.
  explicit Homography2D(const Mat3& matrix);

  [[nodiscard]] const Mat3& matrix() const noexcept { return matrix_; }
  [[nodiscard]] Vec3 apply_homogeneous(double u, double v) const noexcept {
    return matrix_ * Vec3(u, v, 1.0);
  }
  /// Perspective-divided image of (u, v); empty if the mapped point lies on
  /// or behind the destination camera's image plane.
  [[nodiscard]] std::optional<Vec2> apply(double u, double v) const noexcept;

 private:
  Mat3 matrix_;
};

/// Homography taking target pixels to source pixels for points on
/// `plane_in_target` (expressed in the target camera frame).
///
/// With x_s = R x_t + t the relative motion from target to source frame,
/// H = K_s (R + t n^T / d) K_t^-1. Throws Error(kDegeneratePlane) if
/// |d| <= kPlaneOffsetEpsilon or the resulting map is singular.
[[nodiscard]] Homography2D plane_homography(const Plane& plane_in_target, const Camera& source,
                                            const Camera& target);

/// D * K^-1 (u, v, 1). Throws Error(kNonPositiveDepth) for depth <= 0.
[[nodiscard]] Vec3 backproject(const Intrinsics& intrinsics, double u, double v, double depth);

/// Pinhole projection; empty for points with z <= 0.
[[nodiscard]] std::optional<Vec2> project(const Intrinsics& intrinsics, const Vec3& point) noexcept;

/// Unit-norm rotation about `axis` by `radians`.
[[nodiscard]] Mat3 axis_angle(const Vec3& axis, double radians);

}  // namespace smpi
