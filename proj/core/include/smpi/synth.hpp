#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smpi/builder.hpp"
#include "smpi/core.hpp"

namespace smpi {

/// Image size used throughout evaluation (H x W).
inline constexpr Resolution kDefaultResolution{256, 384};

/// Focal length 300 px at 384 px width (scaled with the width otherwise),
/// principal point at the image center.
[[nodiscard]] Intrinsics default_intrinsics(Resolution resolution = kDefaultResolution);

/// Smooth procedural color pattern living in a plane's own 2D coordinates.
struct Texture {
  Vec3 base{0.5, 0.5, 0.5};
  Vec3 axis_u = Vec3::UnitX();
  Vec3 axis_v = Vec3::UnitY();
  double wavelength = 0.7;  // meters
  double amplitude = 0.2;
  Vec3 phase = Vec3::Zero();

  [[nodiscard]] Rgb at(const Vec3& world_point) const noexcept;
};

struct ScenePlane {
  Plane plane;  // world frame
  Texture texture;
};

/// Analytic scene made of infinite textured planes; every ray sees the
/// nearest plane in front of the camera.
class SyntheticScene {
 public:
  SyntheticScene(std::string name, std::vector<ScenePlane> planes, const Camera& reference);

  struct Hit {
    std::size_t plane = 0;
    double depth = 0.0;
    Vec3 world_point = Vec3::Zero();
  };

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const std::vector<ScenePlane>& planes() const noexcept { return planes_; }
  [[nodiscard]] const Camera& reference_camera() const noexcept { return reference_; }

  /// Nearest visible plane through pixel (u, v) of `camera`.
  [[nodiscard]] std::optional<Hit> raycast(const Camera& camera, double u, double v) const;

  /// Ray-cast image, depth and per-plane visibility masks for `camera`.
  [[nodiscard]] SceneGT ground_truth(const Camera& camera) const;

  /// Exact S-MPI as seen from `camera`: one planar proxy per scene plane
  /// carrying the true plane and the texels it owns in that view.
  [[nodiscard]] SMPI exact_smpi(const Camera& camera) const;

 private:
  std::string name_;
  std::vector<ScenePlane> planes_;
  Camera reference_;
};

/// Scene description strings: "box", "corridor", "random(k)",
/// "random(k, seed=s)". `seed` applies when the description has none.
/// Throws Error(kUnknownScene).
[[nodiscard]] SyntheticScene make_scene(std::string_view description, std::uint64_t seed = 0,
                                        Resolution resolution = kDefaultResolution);

struct SynthOutput {
  SyntheticScene scene;
  SceneGT gt;
  SMPI smpi;
};

[[nodiscard]] SynthOutput synth_scene(std::string_view description, std::uint64_t seed = 0,
                                      Resolution resolution = kDefaultResolution);

}  // namespace smpi
