#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "smpi/geometry.hpp"
#include "smpi/render.hpp"

namespace smpi {
namespace {

constexpr std::size_t kA = 0;
constexpr std::size_t kB = 1;

Proxy solid(const Plane& plane, Resolution res, Rgb color, float alpha,
            StructureClass structure = StructureClass::kPlanar) {
  return Proxy(plane, structure, Raster<Rgb>(res, color), Raster<float>(res, alpha));
}

// Two intersecting planes; with cx = 1 column 0 is the ray through x = -1
// and column 2 the ray through x = +1.
SMPI flip_scene() {
  const Resolution res{1, 3};
  const Camera cam(Intrinsics{1, 1, 1, 0}, {}, res);
  return SMPI({solid(normalize_plane({0, 0, 1}, 2), res, {1, 0, 0}, 1.0F),
               solid(normalize_plane({0.6, 0, 0.8}, 1.6), res, {0, 1, 0}, 1.0F)},
              cam);
}

TEST(Ordering, FlipAtProbePixels) {
  const Intrinsics k{1, 1, 0, 0};
  const Plane a = normalize_plane({0, 0, 1}, 2);
  const Plane b = normalize_plane({0.6, 0, 0.8}, 1.6);
  std::uint32_t order[2];

  const double right[2] = {*plane_depth(a, k, 1, 0), *plane_depth(b, k, 1, 0)};
  EXPECT_EQ(right[kA], 2.0);
  EXPECT_NEAR(right[kB], 1.6 / 1.4, 1e-15);
  sort_back_to_front(right, order);
  EXPECT_EQ(order[0], kA);
  EXPECT_EQ(order[1], kB);

  const double left[2] = {*plane_depth(a, k, -1, 0), *plane_depth(b, k, -1, 0)};
  EXPECT_NEAR(left[kB], 8.0, 1e-12);
  sort_back_to_front(left, order);
  EXPECT_EQ(order[0], kB);
  EXPECT_EQ(order[1], kA);

  const PixelOrdering o = compute_ordering(flip_scene(), flip_scene().reference_camera());
  EXPECT_EQ(o.order(0, 2)[0], kA);
  EXPECT_EQ(o.order(0, 2)[1], kB);
  EXPECT_EQ(o.order(0, 0)[0], kB);
  EXPECT_EQ(o.order(0, 0)[1], kA);
}

TEST(Ordering, ParallelPlanesShareGlobalOrder) {
  const Resolution res{5, 7};
  const Camera cam(oracle::centered_intrinsics(res, 4), {}, res);
  const SMPI smpi({solid(normalize_plane({0, 0, 1}, 1), res, {}, 1.0F, StructureClass::kNonPlanar),
                   solid(normalize_plane({0, 0, 1}, 2), res, {}, 1.0F, StructureClass::kNonPlanar)},
                  cam);
  const PixelOrdering o = compute_ordering(smpi, cam);
  for (int r = 0; r < res.height; ++r) {
    for (int c = 0; c < res.width; ++c) {
      ASSERT_EQ(o.order(r, c)[0], 1U);
      ASSERT_EQ(o.order(r, c)[1], 0U);
    }
  }
}

TEST(Ordering, TiesAndInvisibleEntries) {
  const double depths[5] = {2.0, kInvisibleDepth, 3.0, 2.0, kInvisibleDepth};
  std::uint32_t order[5];
  sort_back_to_front(depths, order);
  const std::uint32_t expected[5] = {2, 0, 3, 1, 4};
  for (int i = 0; i < 5; ++i) EXPECT_EQ(order[i], expected[i]);
}

TEST(Ordering, MatchesArgsortOracleOnRandomScenes) {
  std::mt19937_64 rng(21);
  for (int s = 0; s < 20; ++s) {
    const auto scene = oracle::random_scene(rng, {24, 32}, 8);
    const PixelOrdering o = compute_ordering(scene.smpi, scene.target);
    for (int r = 0; r < 24; ++r) {
      for (int c = 0; c < 32; ++c) {
        std::vector<std::pair<double, std::uint32_t>> keyed;
        for (std::uint32_t i = 0; i < scene.smpi.size(); ++i) {
          const Plane& p = scene.smpi.proxy(i).plane();
          const auto t = oracle::move_plane(p.normal(), p.offset(), scene.target.pose());
          const auto d = oracle::ray_hit(t, scene.target.intrinsics(), c, r);
          keyed.emplace_back(d ? -*d : 1.0, i);
        }
        std::sort(keyed.begin(), keyed.end());
        const auto order = o.order(r, c);
        for (std::size_t i = 0; i < keyed.size(); ++i) ASSERT_EQ(order[i], keyed[i].second);
        // Depths along the order are non-increasing over visible entries.
        for (std::size_t i = 1; i < order.size(); ++i) {
          if (o.depths(r, c)[order[i]] > 0.0) {
            ASSERT_GE(o.depths(r, c)[order[i - 1]], o.depths(r, c)[order[i]]);
          }
        }
      }
    }
  }
}

TEST(Composite, SingleOpaqueLayer) {
  const Resolution res{3, 4};
  PixelOrdering o(res, 1);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) o.depths(r, c)[0] = 2.0;
  }
  const RgbaLayer layer{Raster<Rgb>(res, {0.2F, 0.4F, 0.6F}), Raster<float>(res, 1.0F)};
  const ImageBuffer out = composite(o, {&layer, 1});
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      EXPECT_EQ(out.pixels(r, c), (Rgb{0.2F, 0.4F, 0.6F}));
      EXPECT_EQ(out.confidence(r, c), 1.0F);
    }
  }
}

TEST(Composite, TransparentLayersGiveZero) {
  const Resolution res{2, 2};
  PixelOrdering o(res, 2);
  const std::vector<RgbaLayer> layers(2, RgbaLayer{Raster<Rgb>(res, {1, 1, 1}), Raster<float>(res, 0.0F)});
  const ImageBuffer out = composite(o, layers);
  for (const Rgb& c : out.pixels.pixels()) EXPECT_EQ(c, Rgb{});
  for (const float c : out.confidence.pixels()) EXPECT_EQ(c, 0.0F);
}

TEST(Composite, HalfTransparentFrontOverOpaqueBack) {
  const Resolution res{1, 1};
  PixelOrdering o(res, 2);
  o.depths(0, 0)[0] = 4.0;  // back
  o.depths(0, 0)[1] = 2.0;  // front
  sort_back_to_front(o.depths(0, 0), o.order(0, 0));
  const std::vector<RgbaLayer> layers{
      {Raster<Rgb>(res, {1, 1, 1}), Raster<float>(res, 1.0F)},
      {Raster<Rgb>(res, {0, 0, 0}), Raster<float>(res, 0.5F)},
  };
  const ImageBuffer img = composite(o, layers);
  EXPECT_EQ(img.pixels(0, 0).r, 0.5F);
  EXPECT_EQ(img.confidence(0, 0), 1.0F);
  const DepthMap depth = composite_depth(o, layers);
  EXPECT_NEAR(depth.depth(0, 0), 3.0, 1e-12);
}

TEST(Composite, RejectsMismatchedLayers) {
  PixelOrdering o({2, 2}, 2);
  const std::vector<RgbaLayer> one(1, RgbaLayer{Raster<Rgb>({2, 2}), Raster<float>({2, 2})});
  EXPECT_THROW((void)composite(o, one), Error);
  const std::vector<RgbaLayer> wrong(2, RgbaLayer{Raster<Rgb>({2, 3}), Raster<float>({2, 3})});
  EXPECT_THROW((void)composite(o, wrong), Error);
}

TEST(SampleBilinear, PremultipliedAndOutsideIsTransparent) {
  const Resolution res{1, 2};
  RgbaLayer layer{Raster<Rgb>(res), Raster<float>(res)};
  layer.color(0, 0) = {1, 0, 0};
  layer.alpha(0, 0) = 1.0F;
  layer.color(0, 1) = {0, 1, 0};
  layer.alpha(0, 1) = 0.0F;
  const RgbaSample mid = sample_bilinear(layer, 0.5, 0.0);
  EXPECT_EQ(mid.color, (Rgb{1, 0, 0}));
  EXPECT_EQ(mid.alpha, 0.5F);
  EXPECT_EQ(sample_bilinear(layer, -1.0, 0.0).alpha, 0.0F);
  EXPECT_EQ(sample_bilinear(layer, 0.0, 1.0).alpha, 0.0F);
  EXPECT_EQ(sample_bilinear(layer, -0.25, 0.0).alpha, 0.75F);
}

TEST(RenderDepth, OpaqueFrontoParallelPlane) {
  const Resolution res{6, 8};
  const Camera cam(oracle::centered_intrinsics(res, 5), {}, res);
  const SMPI smpi({solid(normalize_plane({0, 0, 1}, 2), res, {}, 1.0F)}, cam);
  const DepthMap depth = render_depth(smpi, cam);
  for (const double d : depth.depth.pixels()) EXPECT_NEAR(d, 2.0, 1e-12);
}

TEST(RenderDepth, OpaqueSlantedPlaneMatchesAnalyticDepth) {
  const Resolution res{32, 48};
  const Intrinsics k = oracle::centered_intrinsics(res, 40);
  const Camera cam(k, {}, res);
  const Vec3 n(0.3, -0.2, 0.9);
  const SMPI smpi({solid(normalize_plane(n, 2.5), res, {}, 1.0F)}, cam);
  const DepthMap depth = render_depth(smpi, cam);
  for (int r = 0; r < res.height; ++r) {
    for (int c = 0; c < res.width; ++c) {
      const auto d = oracle::ray_hit({n.normalized(), 2.5 / n.norm()}, k, c, r);
      ASSERT_TRUE(d.has_value());
      ASSERT_NEAR(depth.depth(r, c), *d, 1e-9);
    }
  }
}

TEST(RenderNovelView, IdentityTargetReproducesReference) {
  std::mt19937_64 rng(22);
  const Resolution res{16, 20};
  const Camera cam(oracle::centered_intrinsics(res, 18), {}, res);
  const Raster<Rgb> color = oracle::random_image(rng, res);
  const SMPI smpi({Proxy(normalize_plane({0.2, 0.1, 1}, 3), StructureClass::kPlanar, color,
                         Raster<float>(res, 1.0F))},
                  cam);
  const RenderedView v = render_novel_view(smpi, cam);
  for (int r = 0; r < res.height; ++r) {
    for (int c = 0; c < res.width; ++c) {
      EXPECT_NEAR(v.image.pixels(r, c).r, color(r, c).r, 1e-6);
      EXPECT_NEAR(v.image.pixels(r, c).g, color(r, c).g, 1e-6);
      EXPECT_NEAR(v.image.pixels(r, c).b, color(r, c).b, 1e-6);
    }
  }
}

TEST(RenderNovelView, LateralShiftOfFrontoParallelPlane) {
  std::mt19937_64 rng(23);
  const Resolution res{12, 40};
  const double f = 50.0;
  const double depth = 2.0;
  const double tx = 0.12;  // disparity f * tx / d = 3 px
  const Camera ref(oracle::centered_intrinsics(res, f), {}, res);
  const Camera tgt(ref.intrinsics(), {Mat3::Identity(), Vec3(-tx, 0, 0)}, res);
  const Raster<Rgb> color = oracle::random_image(rng, res);
  const SMPI smpi({Proxy(normalize_plane({0, 0, 1}, depth), StructureClass::kNonPlanar, color,
                         Raster<float>(res, 1.0F))},
                  ref);
  const RenderedView v = render_novel_view(smpi, tgt);
  const int shift = 3;
  for (int r = 0; r < res.height; ++r) {
    for (int c = 0; c + shift < res.width; ++c) {
      // The target camera sits at +tx, so content moves left by the disparity.
      ASSERT_NEAR(v.image.pixels(r, c).g, color(r, c + shift).g, 1e-5) << r << "," << c;
      ASSERT_NEAR(v.image.confidence(r, c), 1.0F, 1e-6);
    }
    for (int c = res.width - shift + 1; c < res.width; ++c) {
      ASSERT_EQ(v.image.confidence(r, c), 0.0F);
    }
  }
}

TEST(RenderNovelView, MatchesLiteralOracle) {
  std::mt19937_64 rng(24);
  for (int s = 0; s < 10; ++s) {
    const auto scene = oracle::random_scene(rng, {32, 32}, 6);
    const RenderedView v = render_novel_view(scene.smpi, scene.target);
    for (int r = 0; r < 32; ++r) {
      for (int c = 0; c < 32; ++c) {
        const auto o = oracle::render_pixel(scene.smpi, scene.target, r, c);
        ASSERT_NEAR(v.image.pixels(r, c).r, o.r, 1e-6);
        ASSERT_NEAR(v.image.pixels(r, c).g, o.g, 1e-6);
        ASSERT_NEAR(v.image.pixels(r, c).b, o.b, 1e-6);
        ASSERT_NEAR(v.image.confidence(r, c), o.confidence, 1e-6);
      }
    }
  }
}

TEST(RenderNovelView, FusedEqualsModularBitForBit) {
  std::mt19937_64 rng(25);
  for (int s = 0; s < 10; ++s) {
    const auto scene = oracle::random_scene(rng, {24, 40}, 8);
    const RenderedView fused = render_novel_view(scene.smpi, scene.target);
    const PixelOrdering o = compute_ordering(scene.smpi, scene.target);
    const auto layers = warp_layers(scene.smpi, scene.target);
    EXPECT_EQ(fused.image, composite(o, layers));
    EXPECT_EQ(fused.depth, composite_depth(o, layers));
  }
}

TEST(RenderNovelView, ConfidenceAndColorBounds) {
  std::mt19937_64 rng(26);
  for (int s = 0; s < 10; ++s) {
    auto scene = oracle::random_scene(rng, {24, 24}, 8);
    const RenderedView v = render_novel_view(scene.smpi, scene.target);
    for (const float c : v.image.confidence.pixels()) {
      ASSERT_GE(c, 0.0F);
      ASSERT_LE(c, 1.0F);
    }
    for (const Rgb& c : v.image.pixels.pixels()) {
      for (const float x : {c.r, c.g, c.b}) {
        ASSERT_GE(x, 0.0F);
        ASSERT_LE(x, 1.0F + 1e-6F);
      }
    }
  }
  // A fully opaque layer covering the view saturates confidence.
  const Resolution res{8, 8};
  const Camera cam(oracle::centered_intrinsics(res, 8), {}, res);
  const SMPI smpi({solid(normalize_plane({0, 0, 1}, 5), res, {}, 1.0F),
                   solid(normalize_plane({0.1, 0, 1}, 2), res, {}, 0.3F)},
                  cam);
  const RenderedView view = render_novel_view(smpi, cam);
  for (const float c : view.image.confidence.pixels()) EXPECT_EQ(c, 1.0F);
}

TEST(RenderNovelView, DeterministicAcrossRepeats) {
  std::mt19937_64 rng(27);
  const auto scene = oracle::random_scene(rng, {40, 40}, 8);
  const RenderedView a = render_novel_view(scene.smpi, scene.target);
  const RenderedView b = render_novel_view(scene.smpi, scene.target);
  EXPECT_EQ(a.image, b.image);
  EXPECT_EQ(a.depth, b.depth);
}

TEST(RenderNovelView, DegenerateProxyIsTransparent) {
  const Resolution res{6, 6};
  // Target camera sits on the plane x = 1 of the reference frame.
  const Camera ref(oracle::centered_intrinsics(res, 6), {}, res);
  const Camera tgt(ref.intrinsics(), {Mat3::Identity(), Vec3(-1, 0, 0)}, res);
  const SMPI smpi({solid(normalize_plane({1, 0, 0}, 1), res, {1, 1, 1}, 1.0F)}, ref);
  const RenderedView v = render_novel_view(smpi, tgt);
  for (const float c : v.image.confidence.pixels()) EXPECT_EQ(c, 0.0F);
}

std::vector<MpiLayer> random_mpi(std::mt19937_64& rng, Resolution res, int n) {
  std::vector<MpiLayer> layers;
  double d = 1.0;
  std::uniform_real_distribution<double> step(0.1, 1.0);
  for (int i = 0; i < n; ++i) {
    d += step(rng);
    layers.push_back({oracle::random_image(rng, res), oracle::random_alpha(rng, res), d});
  }
  return layers;
}

TEST(StandardMpi, MatchesSmpiRenderer) {
  std::mt19937_64 rng(28);
  const Resolution res{24, 32};
  for (int s = 0; s < 10; ++s) {
    const auto layers = random_mpi(rng, res, 1 + s % 6);
    const Camera ref(oracle::centered_intrinsics(res, 30),
                     {oracle::random_rotation(rng, 0.3), Vec3(0.1, -0.2, 0.3)}, res);
    const Camera tgt(ref.intrinsics(),
                     RigidTransform{oracle::random_rotation(rng, 0.1), Vec3(0.2, 0.1, -0.1)} * ref.pose(), res);
    const ImageBuffer a = render_standard_mpi(layers, ref, tgt);
    const ImageBuffer b = render_novel_view(to_smpi(layers, ref), tgt).image;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
      ASSERT_NEAR(a.pixels.pixels()[i].r, b.pixels.pixels()[i].r, 1e-6);
      ASSERT_NEAR(a.pixels.pixels()[i].g, b.pixels.pixels()[i].g, 1e-6);
      ASSERT_NEAR(a.pixels.pixels()[i].b, b.pixels.pixels()[i].b, 1e-6);
      ASSERT_NEAR(a.confidence.pixels()[i], b.confidence.pixels()[i], 1e-6);
    }
  }
}

TEST(StandardMpi, SingleLayerIdentity) {
  std::mt19937_64 rng(29);
  const Resolution res{5, 6};
  const Camera cam(oracle::centered_intrinsics(res, 5), {}, res);
  const std::vector<MpiLayer> layers{{oracle::random_image(rng, res), Raster<float>(res, 1.0F), 2.0}};
  EXPECT_EQ(render_standard_mpi(layers, cam, cam).pixels, layers[0].color);
}

TEST(StandardMpi, ThirtyTwoLayersMatchLiteralSum) {
  std::mt19937_64 rng(30);
  const Resolution res{10, 12};
  const Camera cam(oracle::centered_intrinsics(res, 10), {}, res);
  std::vector<MpiLayer> layers;
  for (int i = 0; i < 32; ++i) {
    layers.push_back({oracle::random_image(rng, res), oracle::random_alpha(rng, res, 0.05), 1.0 + 0.25 * i});
  }
  const ImageBuffer out = render_standard_mpi(layers, cam, cam);
  for (int r = 0; r < res.height; ++r) {
    for (int c = 0; c < res.width; ++c) {
      std::vector<oracle::Fragment> frags;
      for (std::size_t i = 0; i < layers.size(); ++i) {
        const Rgb& col = layers[i].color(r, c);
        frags.push_back({i, layers[i].depth, {col.r, col.g, col.b, layers[i].alpha(r, c)}});
      }
      const auto o = oracle::compose_literal(frags);
      ASSERT_NEAR(out.pixels(r, c).r, o.r, 1e-6);
      ASSERT_NEAR(out.pixels(r, c).b, o.b, 1e-6);
      ASSERT_NEAR(out.confidence(r, c), o.confidence, 1e-6);
    }
  }
}

TEST(StandardMpi, RejectsNonMonotoneDepths) {
  const Resolution res{2, 2};
  const Camera cam(Intrinsics{}, {}, res);
  const std::vector<MpiLayer> layers{{Raster<Rgb>(res), Raster<float>(res), 2.0},
                                     {Raster<Rgb>(res), Raster<float>(res), 2.0}};
  try {
    (void)render_standard_mpi(layers, cam, cam);
    FAIL() << "expected NonMonotoneDepths";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonMonotoneDepths);
  }
}

TEST(StandardMpi, FrontoParallelOrderingIsGlobal) {
  std::mt19937_64 rng(31);
  const Resolution res{8, 9};
  const Camera cam(oracle::centered_intrinsics(res, 8), {}, res);
  const SMPI smpi = to_smpi(random_mpi(rng, res, 5), cam);
  const PixelOrdering o = compute_ordering(smpi, cam);
  for (int r = 0; r < res.height; ++r) {
    for (int c = 0; c < res.width; ++c) {
      for (std::uint32_t i = 0; i < 5; ++i) ASSERT_EQ(o.order(r, c)[i], 4 - i);
    }
  }
}

}  // namespace
}  // namespace smpi
