#include <algorithm>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "smpi/synth.hpp"

namespace smpi {
namespace {

TEST(Synth, BoxHasFivePlanarProxies) {
  const auto out = synth_scene("box");
  EXPECT_EQ(out.smpi.num_planar(), 5U);
  EXPECT_EQ(out.smpi.num_nonplanar(), 0U);
  EXPECT_EQ(out.gt.plane_masks.size(), 5U);
  EXPECT_EQ(out.smpi.resolution(), kDefaultResolution);
}

TEST(Synth, RandomSceneDepthIsNearestPlane) {
  const Resolution res{48, 72};
  const auto out = synth_scene("random(3, seed=7)", 0, res);
  const Intrinsics& k = out.gt.camera.intrinsics();
  for (int r = 0; r < res.height; ++r) {
    for (int c = 0; c < res.width; ++c) {
      double best = 0.0;
      for (const ScenePlane& p : out.scene.planes()) {
        const auto d = oracle::ray_hit({p.plane.normal(), p.plane.offset()}, k, c, r);
        if (d && (best == 0.0 || *d < best)) best = *d;
      }
      ASSERT_NEAR(out.gt.depth.depth(r, c), best, 1e-12);
    }
  }
}

TEST(Synth, SeedSelectsScene) {
  const auto a = make_scene("random(4)", 1, {32, 48});
  const auto b = make_scene("random(4)", 2, {32, 48});
  const auto c = make_scene("random(4, seed=1)", 99, {32, 48});
  EXPECT_NE(a.planes()[0].plane, b.planes()[0].plane);
  EXPECT_EQ(a.planes()[0].plane, c.planes()[0].plane);
}

TEST(Synth, EveryPlaneVisibleInRandomScenes) {
  const auto out = synth_scene("random(6, seed=5)", 0, {64, 96});
  for (const Mask& m : out.gt.plane_masks) {
    EXPECT_GE(std::count(m.pixels().begin(), m.pixels().end(), 1), 64 * 96 / (40 * 6));
  }
}

TEST(Synth, UnknownScenes) {
  for (const char* name : {"nope", "random()", "random(0)", "random(99999999999999999999)", "box2"}) {
    try {
      (void)make_scene(name, 0, {16, 16});
      ADD_FAILURE() << name;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kUnknownScene) << name;
    }
  }
}

TEST(Synth, ExactSmpiCarriesGroundTruthTexels) {
  const auto out = synth_scene("corridor", 0, {32, 48});
  for (std::size_t i = 0; i < out.smpi.size(); ++i) {
    EXPECT_EQ(out.smpi.proxy(i).mask(), out.gt.plane_masks[i]);
  }
}

}  // namespace
}  // namespace smpi
