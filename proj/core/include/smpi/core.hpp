#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "smpi/error.hpp"
#include "smpi/raster.hpp"

namespace smpi {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Plane in Hessian form: points x with normal · x = offset.
///
/// Only normalize_plane() creates planes, so every instance is canonical:
/// unit normal, offset >= 0, and for offset == 0 the first nonzero normal
/// component is positive.
class Plane {
 public:
  [[nodiscard]] const Vec3& normal() const noexcept { return normal_; }
  [[nodiscard]] double offset() const noexcept { return offset_; }

  /// normal · x - offset.
  [[nodiscard]] double signed_distance(const Vec3& x) const noexcept {
    return normal_.dot(x) - offset_;
  }

  friend bool operator==(const Plane& a, const Plane& b) noexcept {
    return a.normal_ == b.normal_ && a.offset_ == b.offset_;
  }

 private:
  friend Plane normalize_plane(const Vec3& raw_normal, double raw_offset);
  Plane(const Vec3& normal, double offset) : normal_(normal), offset_(offset) {}

  Vec3 normal_;
  double offset_;
};

/// Canonicalizes (raw_normal, raw_offset). Idempotent bit for bit.
/// Throws Error(kZeroNormal) when |raw_normal| <= 1e-12.
Plane normalize_plane(const Vec3& raw_normal, double raw_offset);

inline const Vec3 kFrontoParallelNormal{0.0, 0.0, 1.0};

enum class StructureClass { kPlanar, kNonPlanar };

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  [[nodiscard]] Mat3 matrix() const;
  /// K^-1 (u, v, 1).
  [[nodiscard]] Vec3 ray(double u, double v) const noexcept {
    return {(u - cx) / fx, (v - cy) / fy, 1.0};
  }

  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

/// x' = rotation * x + translation.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  [[nodiscard]] Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
  [[nodiscard]] RigidTransform inverse() const;
  /// Orthonormal with det +1 within tolerance.
  [[nodiscard]] bool is_valid(double tolerance = 1e-9) const;

  friend bool operator==(const RigidTransform& a, const RigidTransform& b) {
    return a.rotation == b.rotation && a.translation == b.translation;
  }
};

/// (a * b).apply(x) == a.apply(b.apply(x)).
RigidTransform operator*(const RigidTransform& a, const RigidTransform& b);

/// Pinhole camera. The pose maps world coordinates into camera coordinates.
class Camera {
 public:
  /// Throws Error(kInvalidCamera) for non-positive focal lengths, an invalid
  /// rotation or a negative resolution.
  Camera(const Intrinsics& intrinsics, const RigidTransform& pose, Resolution resolution);

  [[nodiscard]] const Intrinsics& intrinsics() const noexcept { return intrinsics_; }
  [[nodiscard]] const RigidTransform& pose() const noexcept { return pose_; }
  [[nodiscard]] Resolution resolution() const noexcept { return resolution_; }

  friend bool operator==(const Camera&, const Camera&) = default;

 private:
  Intrinsics intrinsics_;
  RigidTransform pose_;
  Resolution resolution_;
};

/// Maps points in `from`'s camera frame into `to`'s camera frame.
RigidTransform relative_transform(const Camera& from, const Camera& to);

struct RgbaLayer {
  Raster<Rgb> color;
  Raster<float> alpha;

  friend bool operator==(const RgbaLayer&, const RgbaLayer&) = default;
};

inline constexpr float kDefaultMaskThreshold = 0.5F;

/// One S-MPI layer: a world-frame plane plus its RGBA content as seen from
/// the owning SMPI's reference camera. The mask is derived from alpha.
class Proxy {
 public:
  Proxy(const Plane& plane, StructureClass structure, Raster<Rgb> color, Raster<float> alpha,
        float mask_threshold = kDefaultMaskThreshold);

  [[nodiscard]] const Plane& plane() const noexcept { return plane_; }
  [[nodiscard]] StructureClass structure() const noexcept { return structure_; }
  [[nodiscard]] const Raster<Rgb>& color() const noexcept { return layer_.color; }
  [[nodiscard]] const Raster<float>& alpha() const noexcept { return layer_.alpha; }
  [[nodiscard]] const RgbaLayer& layer() const noexcept { return layer_; }
  [[nodiscard]] const Mask& mask() const noexcept { return mask_; }
  [[nodiscard]] float mask_threshold() const noexcept { return mask_threshold_; }
  [[nodiscard]] Resolution resolution() const noexcept { return layer_.alpha.resolution(); }

  friend bool operator==(const Proxy&, const Proxy&) = default;

 private:
  Plane plane_;
  StructureClass structure_;
  RgbaLayer layer_;
  float mask_threshold_;
  Mask mask_;
};

/// Structural multiplane image: planar proxies first, then fronto-parallel
/// non-planar proxies. Planes live in one world frame shared by every view.
class SMPI {
 public:
  /// Throws Error(kInvalidArgument) if the planar/non-planar ordering is
  /// violated or a non-planar proxy is not fronto-parallel in the reference
  /// frame, Error(kDimensionMismatch) if a layer does not match the camera.
  SMPI(std::vector<Proxy> proxies, const Camera& reference_camera);

  [[nodiscard]] std::span<const Proxy> proxies() const noexcept { return proxies_; }
  [[nodiscard]] const Proxy& proxy(std::size_t i) const { return proxies_.at(i); }
  [[nodiscard]] std::size_t size() const noexcept { return proxies_.size(); }
  [[nodiscard]] std::size_t num_planar() const noexcept { return num_planar_; }
  [[nodiscard]] std::size_t num_nonplanar() const noexcept { return proxies_.size() - num_planar_; }
  [[nodiscard]] const Camera& reference_camera() const noexcept { return reference_camera_; }
  [[nodiscard]] Resolution resolution() const noexcept { return reference_camera_.resolution(); }

  friend bool operator==(const SMPI&, const SMPI&) = default;

 private:
  std::vector<Proxy> proxies_;
  std::size_t num_planar_ = 0;
  Camera reference_camera_;
};

/// Rendered colors plus the accumulated compositing weight per pixel.
struct ImageBuffer {
  Raster<Rgb> pixels;
  Raster<float> confidence;

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;
};

inline constexpr double kInvalidDepth = 0.0;

struct DepthMap {
  Raster<double> depth;

  [[nodiscard]] static bool is_valid(double d) noexcept { return d > 0.0; }
  friend bool operator==(const DepthMap&, const DepthMap&) = default;
};

}  // namespace smpi
