#include "smpi/render.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/LU>

#include "parallel.hpp"
#include "smpi/geometry.hpp"

namespace smpi {
namespace {

// Running back-to-front "over" accumulation for one pixel.
struct Accumulator {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
  double confidence = 0.0;
  double depth = 0.0;

  void over(const Rgb& c, double alpha, double d) noexcept {
    const double keep = 1.0 - alpha;
    r = c.r * alpha + r * keep;
    g = c.g * alpha + g * keep;
    b = c.b * alpha + b * keep;
    confidence = alpha + confidence * keep;
    depth = d * alpha + depth * keep;
  }

  void store(int row, int col, ImageBuffer& image, DepthMap& depth_map) const noexcept {
    image.pixels(row, col) = Rgb{static_cast<float>(r), static_cast<float>(g),
                                 static_cast<float>(b)};
    const double conf = std::clamp(confidence, 0.0, 1.0);
    image.confidence(row, col) = static_cast<float>(conf);
    depth_map.depth(row, col) =
        conf >= static_cast<double>(kMinDepthConfidence) ? depth : kInvalidDepth;
  }
};

struct ProxyWarp {
  Plane plane;  // target frame
  std::optional<Homography2D> homography;
  // Open interval of source coordinates whose bilinear footprint touches a
  // nonzero alpha texel; samples outside it are fully transparent.
  double x_lo = 0.0, x_hi = -1.0, y_lo = 0.0, y_hi = -1.0;
};

void alpha_support(const Raster<float>& alpha, ProxyWarp& w) {
  int c0 = alpha.width(), c1 = -1, r0 = alpha.height(), r1 = -1;
  for (int r = 0; r < alpha.height(); ++r) {
    for (int c = 0; c < alpha.width(); ++c) {
      if (alpha(r, c) == 0.0F) continue;
      c0 = std::min(c0, c);
      c1 = std::max(c1, c);
      r0 = std::min(r0, r);
      r1 = std::max(r1, r);
    }
  }
  if (c1 < 0) return;
  w.x_lo = c0 - 1.0;
  w.x_hi = c1 + 1.0;
  w.y_lo = r0 - 1.0;
  w.y_hi = r1 + 1.0;
}

std::vector<ProxyWarp> prepare_warps(const SMPI& smpi, const Camera& target) {
  std::vector<ProxyWarp> warps;
  warps.reserve(smpi.size());
  for (const Proxy& p : smpi.proxies()) {
    ProxyWarp w{transform_plane(p.plane(), target.pose()), std::nullopt};
    alpha_support(p.alpha(), w);
    try {
      w.homography = plane_homography(w.plane, smpi.reference_camera(), target);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegeneratePlane) throw;
    }
    warps.push_back(std::move(w));
  }
  return warps;
}

RgbaSample warp_sample(const ProxyWarp& warp, const RgbaLayer& layer, double u,
                       double v) noexcept {
  if (!warp.homography) return {};
  const auto src = warp.homography->apply(u, v);
  if (!src) return {};
  return sample_bilinear(layer, src->x(), src->y());
}

RenderedView blank_view(Resolution res) {
  return RenderedView{ImageBuffer{Raster<Rgb>(res), Raster<float>(res, 0.0F)},
                      DepthMap{Raster<double>(res, kInvalidDepth)}};
}

RenderedView composite_both(const PixelOrdering& ordering, std::span<const RgbaLayer> layers) {
  if (layers.size() != ordering.num_proxies()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "got " + std::to_string(layers.size()) + " layers for " +
                    std::to_string(ordering.num_proxies()) + " proxies");
  }
  const Resolution res = ordering.resolution();
  for (const RgbaLayer& l : layers) {
    if (l.color.resolution() != res || l.alpha.resolution() != res) {
      throw Error(ErrorCode::kDimensionMismatch, "layer size differs from the ordering");
    }
  }
  RenderedView out = blank_view(res);
  detail::parallel_for_rows(res.height, [&](int row) {
    for (int col = 0; col < res.width; ++col) {
      const auto order = ordering.order(row, col);
      const auto depths = ordering.depths(row, col);
      Accumulator acc;
      for (const std::uint32_t i : order) {
        if (!(depths[i] > 0.0)) break;
        acc.over(layers[i].color(row, col), layers[i].alpha(row, col), depths[i]);
      }
      acc.store(row, col, out.image, out.depth);
    }
  });
  return out;
}

}  // namespace

PixelOrdering::PixelOrdering(Resolution resolution, std::size_t num_proxies)
    : resolution_(resolution),
      num_proxies_(num_proxies),
      order_(resolution.pixel_count() * num_proxies, 0),
      depths_(resolution.pixel_count() * num_proxies, kInvisibleDepth) {}

void sort_back_to_front(std::span<const double> depths, std::span<std::uint32_t> order) noexcept {
  const auto before = [&](std::uint32_t a, std::uint32_t b) {
    const bool va = depths[a] > 0.0;
    const bool vb = depths[b] > 0.0;
    if (va != vb) return va;
    if (va && depths[a] != depths[b]) return depths[a] > depths[b];
    return a < b;
  };
  // Insertion sort: N is small and it is stable on the index-ordered start.
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto idx = static_cast<std::uint32_t>(k);
    std::size_t j = k;
    while (j > 0 && before(idx, order[j - 1])) {
      order[j] = order[j - 1];
      --j;
    }
    order[j] = idx;
  }
}

PixelOrdering compute_ordering(const SMPI& smpi, const Camera& camera) {
  const Resolution res = camera.resolution();
  PixelOrdering ordering(res, smpi.size());
  std::vector<Plane> planes;
  planes.reserve(smpi.size());
  for (const Proxy& p : smpi.proxies()) planes.push_back(transform_plane(p.plane(), camera.pose()));
  const Intrinsics& k = camera.intrinsics();
  detail::parallel_for_rows(res.height, [&](int row) {
    for (int col = 0; col < res.width; ++col) {
      auto depths = ordering.depths(row, col);
      for (std::size_t i = 0; i < planes.size(); ++i) {
        depths[i] = plane_depth(planes[i], k, col, row).value_or(kInvisibleDepth);
      }
      sort_back_to_front(depths, ordering.order(row, col));
    }
  });
  return ordering;
}

RgbaSample sample_bilinear(const RgbaLayer& layer, double x, double y) noexcept {
  return sample_bilinear(layer.color, layer.alpha, x, y);
}

RgbaSample sample_bilinear(const Raster<Rgb>& color, const Raster<float>& alpha, double x,
                           double y) noexcept {
  const int w = alpha.width();
  const int h = alpha.height();
  if (!(x > -1.0 && x < w && y > -1.0 && y < h)) return {};
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const double tx = x - fx;
  const double ty = y - fy;

  double pr = 0.0;
  double pg = 0.0;
  double pb = 0.0;
  double pa = 0.0;
  const auto tap = [&](int c, int r, double weight) {
    if (weight == 0.0 || c < 0 || r < 0 || c >= w || r >= h) return;
    const double a = weight * alpha(r, c);
    if (a == 0.0) return;
    const Rgb& px = color(r, c);
    pr += a * px.r;
    pg += a * px.g;
    pb += a * px.b;
    pa += a;
  };
  tap(x0, y0, (1.0 - tx) * (1.0 - ty));
  tap(x0 + 1, y0, tx * (1.0 - ty));
  tap(x0, y0 + 1, (1.0 - tx) * ty);
  tap(x0 + 1, y0 + 1, tx * ty);
  if (!(pa > 0.0)) return {};
  return RgbaSample{Rgb{static_cast<float>(pr / pa), static_cast<float>(pg / pa),
                        static_cast<float>(pb / pa)},
                    static_cast<float>(std::min(pa, 1.0))};
}

std::vector<RgbaLayer> warp_layers(const SMPI& smpi, const Camera& target) {
  const Resolution res = target.resolution();
  const auto warps = prepare_warps(smpi, target);
  std::vector<RgbaLayer> out;
  out.reserve(smpi.size());
  for (std::size_t i = 0; i < smpi.size(); ++i) {
    RgbaLayer layer{Raster<Rgb>(res), Raster<float>(res, 0.0F)};
    const RgbaLayer& src = smpi.proxy(i).layer();
    detail::parallel_for_rows(res.height, [&](int row) {
      for (int col = 0; col < res.width; ++col) {
        const RgbaSample s = warp_sample(warps[i], src, col, row);
        layer.color(row, col) = s.color;
        layer.alpha(row, col) = s.alpha;
      }
    });
    out.push_back(std::move(layer));
  }
  return out;
}

ImageBuffer composite(const PixelOrdering& ordering, std::span<const RgbaLayer> layers) {
  return composite_both(ordering, layers).image;
}

DepthMap composite_depth(const PixelOrdering& ordering, std::span<const RgbaLayer> layers) {
  return composite_both(ordering, layers).depth;
}

RenderedView render_novel_view(const SMPI& smpi, const Camera& target) {
  const Resolution res = target.resolution();
  const auto warps = prepare_warps(smpi, target);
  const std::size_t n = smpi.size();
  const Intrinsics& k = target.intrinsics();
  RenderedView out = blank_view(res);
  detail::parallel_for_rows(res.height, [&](int row) {
    // Only visible proxies with a nonzero sample are kept: "over" with zero
    // alpha leaves the accumulator bit-for-bit unchanged.
    std::vector<double> depths(n);
    std::vector<std::uint32_t> order(n);
    std::vector<RgbaSample> samples(n);
    for (int col = 0; col < res.width; ++col) {
      std::size_t m = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const ProxyWarp& w = warps[i];
        if (!w.homography) continue;
        const auto d = plane_depth(w.plane, k, col, row);
        if (!d) continue;
        const auto src = w.homography->apply(col, row);
        if (!src || !(src->x() > w.x_lo && src->x() < w.x_hi && src->y() > w.y_lo &&
                      src->y() < w.y_hi)) {
          continue;
        }
        const RgbaSample s = sample_bilinear(smpi.proxy(i).layer(), src->x(), src->y());
        if (!(s.alpha > 0.0F)) continue;
        depths[m] = *d;
        samples[m] = s;
        ++m;
      }
      const std::span<std::uint32_t> kept(order.data(), m);
      sort_back_to_front(std::span<const double>(depths.data(), m), kept);
      Accumulator acc;
      for (const std::uint32_t i : kept) acc.over(samples[i].color, samples[i].alpha, depths[i]);
      acc.store(row, col, out.image, out.depth);
    }
  });
  return out;
}

DepthMap render_depth(const SMPI& smpi, const Camera& camera) {
  return render_novel_view(smpi, camera).depth;
}

ImageBuffer render_standard_mpi(std::span<const MpiLayer> layers, const Camera& reference,
                                const Camera& target) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].color.resolution() != reference.resolution() ||
        layers[i].alpha.resolution() != reference.resolution()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "MPI layer " + std::to_string(i) + " does not match the reference camera");
    }
    if (!(layers[i].depth > 0.0) || (i > 0 && !(layers[i].depth > layers[i - 1].depth))) {
      throw Error(ErrorCode::kNonMonotoneDepths,
                  "MPI layer depths must be positive and strictly increasing");
    }
  }

  // Reference-to-target motion; every layer shares the normal e_z in the
  // reference frame, hence R e_z in the target frame.
  const RigidTransform ref_to_tgt = relative_transform(reference, target);
  const Vec3 normal_t = ref_to_tgt.rotation.col(2);
  const Mat3 k_ref_inv = reference.intrinsics().matrix().inverse();
  const Mat3 k_tgt = target.intrinsics().matrix();

  struct LayerWarp {
    double offset_t = 0.0;
    bool usable = false;
    Mat3 tgt_to_ref = Mat3::Identity();
  };
  std::vector<LayerWarp> warps(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    LayerWarp& w = warps[i];
    w.offset_t = layers[i].depth + normal_t.dot(ref_to_tgt.translation);
    const Mat3 ref_to_tgt_h =
        k_tgt * (ref_to_tgt.rotation +
                 ref_to_tgt.translation * Vec3::UnitZ().transpose() / layers[i].depth) *
        k_ref_inv;
    Eigen::FullPivLU<Mat3> lu(ref_to_tgt_h);
    if (std::abs(w.offset_t) > kPlaneOffsetEpsilon && lu.isInvertible() &&
        std::abs(ref_to_tgt_h.determinant()) > 1e-12) {
      w.tgt_to_ref = lu.inverse();
      w.usable = true;
    }
  }

  const Resolution res = target.resolution();
  RenderedView out = blank_view(res);
  const Intrinsics& kt = target.intrinsics();
  const auto n = static_cast<std::ptrdiff_t>(layers.size());
  detail::parallel_for_rows(res.height, [&](int row) {
    for (int col = 0; col < res.width; ++col) {
      Accumulator acc;
      const double denom = normal_t.dot(kt.ray(col, row));
      if (std::abs(denom) > kGrazingEpsilon) {
        // Depth d_t / denom preserves the offset order when denom > 0 and
        // reverses it otherwise.
        const bool far_is_last = denom > 0.0;
        for (std::ptrdiff_t k = 0; k < n; ++k) {
          const std::size_t i = static_cast<std::size_t>(far_is_last ? n - 1 - k : k);
          const double depth = warps[i].offset_t / denom;
          if (!(depth > 0.0) || !warps[i].usable) continue;
          const Vec3 src = warps[i].tgt_to_ref * Vec3(col, row, 1.0);
          if (!(src.z() > 1e-12)) continue;
          const RgbaSample s = sample_bilinear(layers[i].color, layers[i].alpha,
                                               src.x() / src.z(), src.y() / src.z());
          acc.over(s.color, s.alpha, depth);
        }
      }
      acc.store(row, col, out.image, out.depth);
    }
  });
  return out.image;
}

SMPI to_smpi(std::span<const MpiLayer> layers, const Camera& reference) {
  const RigidTransform ref_to_world = reference.pose().inverse();
  std::vector<Proxy> proxies;
  proxies.reserve(layers.size());
  for (const MpiLayer& l : layers) {
    const Plane world = transform_plane(normalize_plane(kFrontoParallelNormal, l.depth), ref_to_world);
    proxies.emplace_back(world, StructureClass::kNonPlanar, l.color, l.alpha);
  }
  return SMPI(std::move(proxies), reference);
}

}  // namespace smpi
