#include "smpi/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <regex>
#include <utility>

#include <Eigen/Geometry>

#include "smpi/geometry.hpp"

namespace smpi {
namespace {

Texture texture_for(const Vec3& normal, const Vec3& base, const Vec3& phase) {
  const Vec3 helper = std::abs(normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  Texture t;
  t.axis_u = normal.cross(helper).normalized();
  t.axis_v = normal.cross(t.axis_u);
  t.base = base;
  t.phase = phase;
  return t;
}

ScenePlane make_plane(const Vec3& raw_normal, double raw_offset, const Vec3& base,
                      const Vec3& phase) {
  const Plane p = normalize_plane(raw_normal, raw_offset);
  return ScenePlane{p, texture_for(p.normal(), base, phase)};
}

Camera reference_camera(Resolution res) {
  return Camera(default_intrinsics(res), RigidTransform{}, res);
}

// Camera-frame planes plus the inverse pose, for repeated ray casts.
struct CastContext {
  std::vector<Plane> planes;
  RigidTransform cam_to_world;
  Intrinsics intrinsics;
};

CastContext cast_context(const std::vector<ScenePlane>& planes, const Camera& camera) {
  CastContext ctx{{}, camera.pose().inverse(), camera.intrinsics()};
  ctx.planes.reserve(planes.size());
  for (const ScenePlane& p : planes) ctx.planes.push_back(transform_plane(p.plane, camera.pose()));
  return ctx;
}

std::optional<SyntheticScene::Hit> cast(const CastContext& ctx, double u, double v) {
  std::optional<SyntheticScene::Hit> best;
  for (std::size_t i = 0; i < ctx.planes.size(); ++i) {
    const auto d = plane_depth(ctx.planes[i], ctx.intrinsics, u, v);
    if (d && (!best || *d < best->depth)) best = SyntheticScene::Hit{i, *d, Vec3::Zero()};
  }
  if (best) best->world_point = ctx.cam_to_world.apply(backproject(ctx.intrinsics, u, v, best->depth));
  return best;
}

std::vector<ScenePlane> box_planes() {
  return {
      make_plane({0, 1, 0}, 1.0, {0.55, 0.45, 0.35}, {0.0, 1.0, 2.0}),       // floor
      make_plane({0, -1, 0}, 1.0, {0.70, 0.70, 0.65}, {0.5, 1.5, 2.5}),      // ceiling
      make_plane({0, 0, 1}, 5.0, {0.40, 0.55, 0.65}, {1.0, 2.0, 3.0}),       // back wall
      make_plane({-1, 0, -0.16}, 1.6, {0.65, 0.40, 0.40}, {1.5, 0.2, 0.9}),  // left wall
      make_plane({1, 0, -0.16}, 1.6, {0.40, 0.60, 0.40}, {2.2, 0.7, 1.3}),   // right wall
  };
}

std::vector<ScenePlane> corridor_planes() {
  return {
      make_plane({0, 1, 0}, 1.0, {0.50, 0.45, 0.40}, {0.3, 1.1, 2.0}),
      make_plane({0, -1, 0}, 1.2, {0.75, 0.75, 0.70}, {0.9, 0.1, 1.7}),
      make_plane({-1, 0, 0}, 1.2, {0.60, 0.50, 0.35}, {1.2, 2.4, 0.6}),
      make_plane({1, 0, 0}, 1.2, {0.35, 0.50, 0.60}, {2.8, 0.4, 1.9}),
      make_plane({0, 0, 1}, 12.0, {0.45, 0.35, 0.55}, {0.7, 1.6, 2.2}),
  };
}

std::vector<std::size_t> visible_counts(const std::vector<ScenePlane>& planes, const Camera& camera) {
  const CastContext ctx = cast_context(planes, camera);
  std::vector<std::size_t> counts(planes.size(), 0);
  const Resolution res = camera.resolution();
  for (int r = 0; r < res.height; ++r) {
    for (int c = 0; c < res.width; ++c) {
      if (const auto hit = cast(ctx, c, r)) ++counts[hit->plane];
    }
  }
  return counts;
}

// Planes tangent to the convex inverse-depth bowl 1/D = c0 + alpha |x|^2
// over normalized image coordinates x, touching it at one anchor per image
// tile. The nearest plane at any pixel is the one with the closest anchor,
// so every plane owns the Voronoi cell around its anchor.
std::vector<Plane> draw_tangent_planes(int count, std::mt19937_64& rng, const Camera& camera) {
  const Resolution res = camera.resolution();
  const Intrinsics& k = camera.intrinsics();
  const int cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(
                                   count * static_cast<double>(res.width) / std::max(res.height, 1)))));
  const int rows = (count + cols - 1) / cols;
  std::vector<int> tiles(static_cast<std::size_t>(rows * cols));
  std::iota(tiles.begin(), tiles.end(), 0);
  std::shuffle(tiles.begin(), tiles.end(), rng);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vec3 corner0 = k.ray(-0.5, -0.5);
  const Vec3 corner1 = k.ray(res.width - 0.5, res.height - 0.5);
  const double diameter_sq = (corner1 - corner0).head<2>().squaredNorm();
  const double c0 = 1.0 / (2.0 + 2.0 * unit(rng));
  // Keeps 1/D >= c0 / 4 anywhere in the image.
  const double alpha = (0.3 + 0.7 * unit(rng)) * 0.75 * c0 / diameter_sq;

  std::vector<Plane> planes;
  for (int i = 0; i < count; ++i) {
    const int t = tiles[static_cast<std::size_t>(i)];
    const double u = (t % cols + 0.25 + 0.5 * unit(rng)) * res.width / cols - 0.5;
    const double v = (t / cols + 0.25 + 0.5 * unit(rng)) * res.height / rows - 0.5;
    const Vec3 p = k.ray(u, v);
    const double px = p.x();
    const double py = p.y();
    // Tangent a x + b y + c of the bowl at p, i.e. n / d with d = 1.
    const Vec3 n(2.0 * alpha * px, 2.0 * alpha * py, c0 - alpha * (px * px + py * py));
    planes.push_back(normalize_plane(n, 1.0));
  }
  return planes;
}

std::vector<ScenePlane> random_planes(int count, std::uint64_t seed, const Camera& camera) {
  if (count < 1 || count > 64) {
    throw Error(ErrorCode::kUnknownScene, "random scenes take between 1 and 64 planes");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> base(0.25, 0.75);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const std::size_t min_pixels =
      std::max<std::size_t>(4, camera.resolution().pixel_count() / (40 * static_cast<std::size_t>(count)));
  const RigidTransform cam_to_world = camera.pose().inverse();

  for (int attempt = 0; attempt < 20; ++attempt) {
    const auto drawn = draw_tangent_planes(count, rng, camera);
    std::vector<ScenePlane> planes;
    for (const Plane& p : drawn) {
      const Vec3 b(base(rng), base(rng), base(rng));
      const Vec3 ph(phase(rng), phase(rng), phase(rng));
      const Plane world = transform_plane(p, cam_to_world);
      planes.push_back(make_plane(world.normal(), world.offset(), b, ph));
    }
    const auto counts = visible_counts(planes, camera);
    if (std::all_of(counts.begin(), counts.end(), [&](std::size_t c) { return c >= min_pixels; })) {
      return planes;
    }
  }
  throw Error(ErrorCode::kUnknownScene, "could not draw a random scene with every plane visible");
}

}  // namespace

Intrinsics default_intrinsics(Resolution resolution) {
  // 300 px at the default width; other sizes keep the same field of view.
  const double f = 300.0 * resolution.width / kDefaultResolution.width;
  return Intrinsics{f, f, (resolution.width - 1) / 2.0, (resolution.height - 1) / 2.0};
}

Rgb Texture::at(const Vec3& world_point) const noexcept {
  const double omega = 2.0 * std::numbers::pi / wavelength;
  const double s = omega * axis_u.dot(world_point);
  const double t = omega * axis_v.dot(world_point);
  const auto channel = [&](int k) {
    const double value = base[k] + amplitude * std::sin(s + phase[k]) * std::cos(t + 0.5 * phase[k]);
    return static_cast<float>(std::clamp(value, 0.0, 1.0));
  };
  return Rgb{channel(0), channel(1), channel(2)};
}

SyntheticScene::SyntheticScene(std::string name, std::vector<ScenePlane> planes,
                               const Camera& reference)
    : name_(std::move(name)), planes_(std::move(planes)), reference_(reference) {}

std::optional<SyntheticScene::Hit> SyntheticScene::raycast(const Camera& camera, double u,
                                                           double v) const {
  return cast(cast_context(planes_, camera), u, v);
}

SceneGT SyntheticScene::ground_truth(const Camera& camera) const {
  const Resolution res = camera.resolution();
  SceneGT gt{Raster<Rgb>(res), DepthMap{Raster<double>(res, kInvalidDepth)},
             std::vector<Mask>(planes_.size(), Mask(res, 0)), camera};
  const CastContext ctx = cast_context(planes_, camera);
  for (int r = 0; r < res.height; ++r) {
    for (int c = 0; c < res.width; ++c) {
      const auto hit = cast(ctx, c, r);
      if (!hit) continue;
      gt.image(r, c) = planes_[hit->plane].texture.at(hit->world_point);
      gt.depth.depth(r, c) = hit->depth;
      gt.plane_masks[hit->plane](r, c) = 1;
    }
  }
  return gt;
}

SMPI SyntheticScene::exact_smpi(const Camera& camera) const {
  const SceneGT gt = ground_truth(camera);
  const Resolution res = camera.resolution();
  std::vector<Proxy> proxies;
  proxies.reserve(planes_.size());
  for (std::size_t i = 0; i < planes_.size(); ++i) {
    Raster<Rgb> color(res);
    Raster<float> alpha(res, 0.0F);
    for (std::size_t p = 0; p < res.pixel_count(); ++p) {
      if (!gt.plane_masks[i].pixels()[p]) continue;
      color.pixels()[p] = gt.image.pixels()[p];
      alpha.pixels()[p] = 1.0F;
    }
    proxies.emplace_back(planes_[i].plane, StructureClass::kPlanar, std::move(color),
                         std::move(alpha));
  }
  return SMPI(std::move(proxies), camera);
}

SyntheticScene make_scene(std::string_view description, std::uint64_t seed, Resolution resolution) {
  const Camera camera = reference_camera(resolution);
  const std::string text(description);
  if (text == "box") return SyntheticScene("box", box_planes(), camera);
  if (text == "corridor") return SyntheticScene("corridor", corridor_planes(), camera);

  static const std::regex random_re(R"(random\(\s*(\d+)\s*(?:,\s*(?:seed\s*=\s*)?(\d+)\s*)?\))");
  std::smatch m;
  if (std::regex_match(text, m, random_re)) {
    int count = 0;
    std::uint64_t s = seed;
    const std::string k = m[1].str();
    const std::string given = m[2].str();
    const bool ok = std::from_chars(k.data(), k.data() + k.size(), count).ec == std::errc{} &&
                    (!m[2].matched ||
                     std::from_chars(given.data(), given.data() + given.size(), s).ec == std::errc{});
    if (!ok) throw Error(ErrorCode::kUnknownScene, "scene parameters out of range in '" + text + "'");
    return SyntheticScene(text, random_planes(count, s, camera), camera);
  }
  throw Error(ErrorCode::kUnknownScene, "unknown scene '" + text + "'");
}

SynthOutput synth_scene(std::string_view description, std::uint64_t seed, Resolution resolution) {
  SyntheticScene scene = make_scene(description, seed, resolution);
  SceneGT gt = scene.ground_truth(scene.reference_camera());
  SMPI smpi = scene.exact_smpi(scene.reference_camera());
  return SynthOutput{std::move(scene), std::move(gt), std::move(smpi)};
}

}  // namespace smpi
