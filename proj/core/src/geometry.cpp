#include "smpi/geometry.hpp"

#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/LU>

namespace smpi {

std::optional<double> plane_depth(const Plane& plane, const Intrinsics& intrinsics, double u,
                                  double v) noexcept {
  const double denom = plane.normal().dot(intrinsics.ray(u, v));
  if (std::abs(denom) <= kGrazingEpsilon) return std::nullopt;
  const double depth = plane.offset() / denom;
  if (!(depth > 0.0)) return std::nullopt;
  return depth;
}

Plane transform_plane(const Plane& plane, const RigidTransform& src_to_tgt) {
  const Vec3 n = src_to_tgt.rotation * plane.normal();
  return normalize_plane(n, plane.offset() + n.dot(src_to_tgt.translation));
}

Homography2D::Homography2D(const Mat3& matrix) : matrix_(matrix) {
  const double det = matrix.determinant();
  if (!std::isfinite(det) || std::abs(det) <= 1e-12) {
    throw Error(ErrorCode::kInvalidArgument, "homography is singular");
  }
}

std::optional<Vec2> Homography2D::apply(double u, double v) const noexcept {
  const Vec3 h = apply_homogeneous(u, v);
  if (!(h.z() > 1e-12)) return std::nullopt;
  return Vec2(h.x() / h.z(), h.y() / h.z());
}

Homography2D plane_homography(const Plane& plane_in_target, const Camera& source,
                              const Camera& target) {
  const double d = plane_in_target.offset();
  if (std::abs(d) <= kPlaneOffsetEpsilon) {
    throw Error(ErrorCode::kDegeneratePlane, "plane passes through the target optical center");
  }
  const RigidTransform tgt_to_src = relative_transform(target, source);
  const Mat3 euclidean =
      tgt_to_src.rotation + tgt_to_src.translation * plane_in_target.normal().transpose() / d;
  const Intrinsics& kt = target.intrinsics();
  Mat3 kt_inv;
  kt_inv << 1.0 / kt.fx, 0.0, -kt.cx / kt.fx, 0.0, 1.0 / kt.fy, -kt.cy / kt.fy, 0.0, 0.0, 1.0;
  const Mat3 h = source.intrinsics().matrix() * euclidean * kt_inv;
  const double det = h.determinant();
  if (!std::isfinite(det) || std::abs(det) <= 1e-12) {
    throw Error(ErrorCode::kDegeneratePlane, "plane passes through the source optical center");
  }
  return Homography2D(h);
}

Vec3 backproject(const Intrinsics& intrinsics, double u, double v, double depth) {
  if (!(depth > 0.0)) {
    throw Error(ErrorCode::kNonPositiveDepth, "backprojection depth must be positive");
  }
  return depth * intrinsics.ray(u, v);
}

std::optional<Vec2> project(const Intrinsics& intrinsics, const Vec3& point) noexcept {
  if (!(point.z() > 0.0)) return std::nullopt;
  return Vec2(intrinsics.fx * point.x() / point.z() + intrinsics.cx,
              intrinsics.fy * point.y() / point.z() + intrinsics.cy);
}

Mat3 axis_angle(const Vec3& axis, double radians) {
  return Eigen::AngleAxisd(radians, axis.normalized()).toRotationMatrix();
}

}  // namespace smpi
