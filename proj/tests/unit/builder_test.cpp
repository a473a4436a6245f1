#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "smpi/builder.hpp"
#include "smpi/geometry.hpp"
#include "smpi/render.hpp"
#include "smpi/synth.hpp"

namespace smpi {
namespace {

// Two in-plane directions orthogonal to n.
std::pair<Vec3, Vec3> basis(const Vec3& n) {
  const Vec3 a = n.unitOrthogonal();
  return {a, n.cross(a)};
}

std::vector<Vec3> points_on(const Vec3& n, double d, int count, std::mt19937_64& rng, double noise = 0.0) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::normal_distribution<double> g(0.0, noise > 0.0 ? noise : 1.0);
  const auto [a, b] = basis(n);
  std::vector<Vec3> pts;
  for (int i = 0; i < count; ++i) {
    Vec3 p = n * d + u(rng) * a + u(rng) * b;
    if (noise > 0.0) p += g(rng) * n;
    pts.push_back(p);
  }
  return pts;
}

TEST(FitPlane, ThreePoints) {
  const std::vector<Vec3> pts{{0, 0, 2}, {1, 0, 2}, {0, 1, 2}};
  const PlaneFit f = fit_plane(pts);
  EXPECT_LE((f.plane.normal() - Vec3(0, 0, 1)).norm(), 1e-12);
  EXPECT_NEAR(f.plane.offset(), 2.0, 1e-12);
  EXPECT_NEAR(f.rms_residual, 0.0, 1e-12);
}

TEST(FitPlane, NoiselessRecovery) {
  std::mt19937_64 rng(41);
  const Vec3 n(0.6, 0, 0.8);
  const PlaneFit f = fit_plane(points_on(n, 1.6, 100, rng));
  EXPECT_LE((f.plane.normal() - n).norm(), 1e-9);
  EXPECT_NEAR(f.plane.offset(), 1.6, 1e-9);
}

TEST(FitPlane, AgreesWithIndependentEigensolver) {
  std::mt19937_64 rng(42);
  const auto pts = points_on(Vec3(0.2, -0.5, 0.8).normalized(), 2.3, 300, rng, 0.05);
  // Un-centered second moments with a general eigensolver.
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : pts) mean += p;
  mean /= pts.size();
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : pts) cov += p * p.transpose();
  cov = cov / pts.size() - mean * mean.transpose();
  const Eigen::EigenSolver<Mat3> es(cov);
  int smallest = 0;
  for (int i = 1; i < 3; ++i) {
    if (es.eigenvalues()[i].real() < es.eigenvalues()[smallest].real()) smallest = i;
  }
  Vec3 n = es.eigenvectors().col(smallest).real().normalized();
  if (n.dot(mean) < 0) n = -n;
  const PlaneFit f = fit_plane(pts);
  EXPECT_LE((f.plane.normal() - n).norm(), 1e-9);
  EXPECT_NEAR(f.plane.offset(), n.dot(mean), 1e-9);
}

TEST(FitPlane, NoisyNormalWithinTwoDegrees) {
  std::mt19937_64 rng(43);
  const Vec3 n = Vec3(0.3, 0.4, 0.85).normalized();
  const PlaneFit f = fit_plane(points_on(n, 1.0, 600, rng, 0.01));
  const double angle = std::acos(std::clamp(std::abs(f.plane.normal().dot(n)), 0.0, 1.0));
  EXPECT_LT(angle * 180 / std::numbers::pi, 2.0);
  EXPECT_NEAR(f.rms_residual, 0.01, 0.002);
}

TEST(FitPlane, DegenerateInputs) {
  const auto expect_degenerate = [](const std::vector<Vec3>& pts) {
    try {
      (void)fit_plane(pts);
      ADD_FAILURE() << "expected Degenerate";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
    }
  };
  expect_degenerate({{0, 0, 1}, {1, 1, 1}});
  expect_degenerate({{0, 0, 1}, {1, 1, 1}, {2, 2, 1}, {3, 3, 1}});
  expect_degenerate({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}});
  // Isotropic cloud: no preferred normal.
  expect_degenerate({{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}});
}

SceneGT wall_scene(Resolution res) {
  const Camera cam(default_intrinsics(res), {}, res);
  return SceneGT{Raster<Rgb>(res, {0.3F, 0.6F, 0.9F}), DepthMap{Raster<double>(res, 2.0)},
                 {Mask(res, 1)}, cam};
}

TEST(BuildSmpi, FrontoParallelWall) {
  const BuildResult b = build_smpi(wall_scene({20, 30}));
  ASSERT_EQ(b.smpi.num_planar(), 1U);
  EXPECT_EQ(b.smpi.num_nonplanar(), 0U);
  EXPECT_LE((b.smpi.proxy(0).plane().normal() - Vec3(0, 0, 1)).norm(), 1e-9);
  EXPECT_NEAR(b.smpi.proxy(0).plane().offset(), 2.0, 1e-9);
  for (const float a : b.smpi.proxy(0).alpha().pixels()) EXPECT_EQ(a, 1.0F);
}

SceneGT ramp_scene(Resolution res) {
  const Camera cam(default_intrinsics(res), {}, res);
  SceneGT gt{Raster<Rgb>(res), DepthMap{Raster<double>(res)}, {}, cam};
  for (int r = 0; r < res.height; ++r) {
    for (int c = 0; c < res.width; ++c) gt.depth.depth(r, c) = 1.0 + 2.0 * c / (res.width - 1);
  }
  return gt;
}

TEST(BuildSmpi, UniformDepthBins) {
  const SceneGT gt = ramp_scene({4, 41});
  const BuildResult b = build_smpi(gt, BuildOptions{.nonplanar_layers = 4});
  ASSERT_EQ(b.smpi.num_planar(), 0U);
  ASSERT_EQ(b.smpi.num_nonplanar(), 4U);
  const double expected[4] = {1.25, 1.75, 2.25, 2.75};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(b.nonplanar_depths[i], expected[i], 1e-12);
    EXPECT_NEAR(b.smpi.proxy(i).plane().offset(), expected[i], 1e-12);
    EXPECT_EQ(b.smpi.proxy(i).plane().normal(), Vec3(0, 0, 1));
  }
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 41; ++c) {
      const double d = gt.depth.depth(r, c);
      for (int i = 0; i < 4; ++i) {
        const bool inside = d >= 1.0 + 0.5 * i && (d < 1.5 + 0.5 * i || (i == 3 && d <= 3.0));
        ASSERT_EQ(b.smpi.proxy(i).alpha()(r, c), inside ? 1.0F : 0.0F) << c << " bin " << i;
      }
    }
  }
}

TEST(BuildSmpi, DisparityBinsAreNearestFirst) {
  const BuildResult b = build_smpi(ramp_scene({2, 30}), {.nonplanar_layers = 3, .binning = DepthBinning::kUniformDisparity});
  ASSERT_EQ(b.nonplanar_depths.size(), 3U);
  EXPECT_LT(b.nonplanar_depths[0], b.nonplanar_depths[1]);
  EXPECT_LT(b.nonplanar_depths[1], b.nonplanar_depths[2]);
  // Bin centers are equally spaced in inverse depth.
  EXPECT_NEAR(1 / b.nonplanar_depths[0] - 1 / b.nonplanar_depths[1],
              1 / b.nonplanar_depths[1] - 1 / b.nonplanar_depths[2], 1e-12);
}

TEST(BuildSmpi, DefaultLayerCountSuitsIndoorScenes) {
  // Eight non-planar layers plus a handful of planes lands near twelve proxies.
  EXPECT_EQ(BuildOptions{}.nonplanar_layers, 8);
}

TEST(BuildSmpi, EveryValidPixelHasExactlyOneOwner) {
  auto out = synth_scene("random(4, seed=3)", 0, {48, 64});
  SceneGT gt = out.gt;
  // Drop one plane's mask so its pixels fall to the depth bins.
  gt.plane_masks.erase(gt.plane_masks.begin() + 1);
  const BuildResult b = build_smpi(gt, {.nonplanar_layers = 5});
  EXPECT_EQ(b.smpi.num_planar(), 3U);
  EXPECT_EQ(b.smpi.num_nonplanar(), 5U);
  for (int r = 0; r < 48; ++r) {
    for (int c = 0; c < 64; ++c) {
      int owners = 0;
      for (const Proxy& p : b.smpi.proxies()) owners += p.mask()(r, c);
      ASSERT_EQ(owners, DepthMap::is_valid(gt.depth.depth(r, c)) ? 1 : 0);
    }
  }
}

TEST(BuildSmpi, ReferenceDepthFidelity) {
  const auto out = synth_scene("box", 0, {64, 96});
  const BuildResult b = build_smpi(out.gt);
  const DepthMap rendered = render_depth(b.smpi, out.gt.camera);
  for (std::size_t m = 0; m < out.gt.plane_masks.size(); ++m) {
    double sq = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < rendered.depth.size(); ++i) {
      if (!out.gt.plane_masks[m].pixels()[i]) continue;
      const double e = rendered.depth.pixels()[i] - out.gt.depth.depth.pixels()[i];
      sq += e * e;
      ++n;
    }
    ASSERT_GT(n, 0U);
    EXPECT_LE(std::sqrt(sq / n), b.fit_residuals[m] + 1e-6);
  }
}

TEST(BuildSmpi, RecoversSyntheticPlanes) {
  for (const char* name : {"box", "corridor", "random(5, seed=11)"}) {
    const auto out = synth_scene(name, 0, {64, 96});
    const BuildResult b = build_smpi(out.gt);
    ASSERT_EQ(b.smpi.size(), out.smpi.size()) << name;
    for (std::size_t i = 0; i < b.smpi.size(); ++i) {
      EXPECT_LE((b.smpi.proxy(i).plane().normal() - out.smpi.proxy(i).plane().normal()).norm(), 1e-6) << name;
      EXPECT_NEAR(b.smpi.proxy(i).plane().offset(), out.smpi.proxy(i).plane().offset(), 1e-6) << name;
    }
  }
}

TEST(BuildSmpi, FeatherSoftensOnlyTheBoundaryRing) {
  SceneGT gt = wall_scene({9, 9});
  gt.plane_masks[0] = Mask({9, 9}, 0);
  for (int r = 2; r < 7; ++r) {
    for (int c = 2; c < 7; ++c) gt.plane_masks[0](r, c) = 1;
  }
  const BuildResult b = build_smpi(gt, {.feather = true});
  const Proxy& p = b.smpi.proxy(0);
  EXPECT_EQ(p.alpha()(4, 4), 1.0F);
  EXPECT_EQ(p.alpha()(2, 4), 0.75F);
  EXPECT_EQ(p.alpha()(0, 0), 0.0F);
  // The mask survives feathering.
  EXPECT_EQ(p.mask(), gt.plane_masks[0]);
}

TEST(BuildSmpi, Errors) {
  SceneGT empty = wall_scene({4, 4});
  empty.plane_masks.clear();
  for (double& d : empty.depth.depth.pixels()) d = kInvalidDepth;
  try {
    (void)build_smpi(empty);
    FAIL() << "expected EmptyScene";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyScene);
  }
  SceneGT overlap = wall_scene({4, 4});
  overlap.plane_masks.push_back(Mask({4, 4}, 1));
  EXPECT_THROW((void)build_smpi(overlap), Error);
  EXPECT_THROW((void)build_smpi(wall_scene({4, 4}), {.nonplanar_layers = 0}), Error);
}

}  // namespace
}  // namespace smpi
