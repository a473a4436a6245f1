#include "smpi/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "smpi/geometry.hpp"

namespace smpi {
namespace {

void require_same(Resolution a, Resolution b) {
  if (a != b) throw Error(ErrorCode::kDimensionMismatch, "inputs differ in size");
}

double psnr_from_mse(double mse) {
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double squared_error(const Rgb& a, const Rgb& b) {
  const double dr = static_cast<double>(a.r) - b.r;
  const double dg = static_cast<double>(a.g) - b.g;
  const double db = static_cast<double>(a.b) - b.b;
  return dr * dr + dg * dg + db * db;
}

std::vector<double> luma(const Raster<Rgb>& image) {
  std::vector<double> out;
  out.reserve(image.size());
  for (const Rgb& c : image.pixels()) out.push_back(0.299 * c.r + 0.587 * c.g + 0.114 * c.b);
  return out;
}

// Valid-mode separable filtering of a h x w image with a symmetric kernel.
std::vector<double> filter_valid(const std::vector<double>& img, int h, int w,
                                 const std::vector<double>& kernel) {
  const int k = static_cast<int>(kernel.size());
  const int ow = w - k + 1;
  const int oh = h - k + 1;
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < ow; ++c) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += kernel[i] * img[static_cast<std::size_t>(r) * w + c + i];
      tmp[static_cast<std::size_t>(r) * ow + c] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += kernel[i] * tmp[static_cast<std::size_t>(r + i) * ow + c];
      out[static_cast<std::size_t>(r) * ow + c] = s;
    }
  }
  return out;
}

// Dense ids in order of first appearance, so every metric is computed
// identically under any relabeling.
std::vector<std::size_t> canonical_labels(const LabelRaster& labels, std::size_t& count) {
  std::unordered_map<std::int32_t, std::size_t> ids;
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const std::int32_t l : labels.pixels()) {
    auto [it, inserted] = ids.try_emplace(l, ids.size());
    out.push_back(it->second);
  }
  count = ids.size();
  return out;
}

}  // namespace

double psnr(const Raster<Rgb>& pred, const Raster<Rgb>& gt) {
  require_same(pred.resolution(), gt.resolution());
  if (pred.empty()) throw Error(ErrorCode::kEmptyMask, "empty image");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += squared_error(pred.pixels()[i], gt.pixels()[i]);
  return psnr_from_mse(sum / (3.0 * static_cast<double>(pred.size())));
}

double psnr(const Raster<Rgb>& pred, const Raster<Rgb>& gt, const Mask& mask) {
  require_same(pred.resolution(), gt.resolution());
  require_same(pred.resolution(), mask.resolution());
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!mask.pixels()[i]) continue;
    sum += squared_error(pred.pixels()[i], gt.pixels()[i]);
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::kEmptyMask, "mask selects no pixel");
  return psnr_from_mse(sum / (3.0 * static_cast<double>(n)));
}

double ssim(const Raster<Rgb>& pred, const Raster<Rgb>& gt) {
  require_same(pred.resolution(), gt.resolution());
  constexpr int kWindow = 11;
  constexpr double kSigma = 1.5;
  constexpr double kC1 = 0.01 * 0.01;
  constexpr double kC2 = 0.03 * 0.03;
  const int h = pred.height();
  const int w = pred.width();
  if (h < kWindow || w < kWindow) {
    throw Error(ErrorCode::kImageTooSmall, "SSIM needs at least 11x11 pixels");
  }

  std::vector<double> kernel(kWindow);
  for (int i = 0; i < kWindow; ++i) {
    const double x = i - kWindow / 2;
    kernel[i] = std::exp(-x * x / (2.0 * kSigma * kSigma));
  }
  const double ksum = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  for (double& k : kernel) k /= ksum;

  const std::vector<double> x = luma(pred);
  const std::vector<double> y = luma(gt);
  std::vector<double> xx(x.size());
  std::vector<double> yy(x.size());
  std::vector<double> xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = filter_valid(x, h, w, kernel);
  const auto my = filter_valid(y, h, w, kernel);
  const auto mxx = filter_valid(xx, h, w, kernel);
  const auto myy = filter_valid(yy, h, w, kernel);
  const auto mxy = filter_valid(xy, h, w, kernel);

  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = mxx[i] - mx[i] * mx[i];
    const double vy = myy[i] - my[i] * my[i];
    const double cov = mxy[i] - mx[i] * my[i];
    total += ((2.0 * mx[i] * my[i] + kC1) * (2.0 * cov + kC2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + kC1) * (vx + vy + kC2));
  }
  return total / static_cast<double>(mx.size());
}

DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt) {
  require_same(pred.depth.resolution(), gt.depth.resolution());
  DepthMetrics m;
  double sq = 0.0;
  std::size_t a1 = 0;
  std::size_t a2 = 0;
  std::size_t a3 = 0;
  for (std::size_t i = 0; i < gt.depth.size(); ++i) {
    const double p = pred.depth.pixels()[i];
    const double g = gt.depth.pixels()[i];
    if (!DepthMap::is_valid(p) || !DepthMap::is_valid(g)) continue;
    ++m.count;
    m.rel += std::abs(p - g) / g;
    m.log10 += std::abs(std::log10(p) - std::log10(g));
    sq += (p - g) * (p - g);
    const double ratio = std::max(p / g, g / p);
    a1 += ratio < 1.25 ? 1 : 0;
    a2 += ratio < 1.25 * 1.25 ? 1 : 0;
    a3 += ratio < 1.25 * 1.25 * 1.25 ? 1 : 0;
  }
  if (m.count == 0) throw Error(ErrorCode::kNoOverlap, "no pixel is valid in both depth maps");
  const auto n = static_cast<double>(m.count);
  m.rel /= n;
  m.log10 /= n;
  m.rmse = std::sqrt(sq / n);
  m.a1 = static_cast<double>(a1) / n;
  m.a2 = static_cast<double>(a2) / n;
  m.a3 = static_cast<double>(a3) / n;
  return m;
}

std::vector<double> default_recall_thresholds() {
  std::vector<double> t;
  for (int i = 0; i <= 16; ++i) t.push_back(i / 20.0);
  return t;
}

RecallCurve plane_recall(std::span<const PlaneInstance> pred, std::span<const PlaneInstance> gt,
                         const Intrinsics& intrinsics, std::span<const double> depth_thresholds,
                         double iou_threshold) {
  for (const auto& p : pred) {
    for (const auto& g : gt) require_same(p.mask.resolution(), g.mask.resolution());
  }

  struct Candidate {
    double iou;
    std::size_t gt;
    std::size_t pred;
    double depth_error;
  };
  std::vector<Candidate> candidates;
  for (std::size_t gi = 0; gi < gt.size(); ++gi) {
    const Mask& gm = gt[gi].mask;
    for (std::size_t pi = 0; pi < pred.size(); ++pi) {
      const Mask& pm = pred[pi].mask;
      std::size_t inter = 0;
      std::size_t uni = 0;
      double err = 0.0;
      std::size_t err_n = 0;
      for (int r = 0; r < gm.height(); ++r) {
        for (int c = 0; c < gm.width(); ++c) {
          const bool a = gm(r, c) != 0;
          const bool b = pm(r, c) != 0;
          uni += (a || b) ? 1 : 0;
          if (!(a && b)) continue;
          ++inter;
          const auto dg = plane_depth(gt[gi].plane, intrinsics, c, r);
          const auto dp = plane_depth(pred[pi].plane, intrinsics, c, r);
          if (dg && dp) {
            err += std::abs(*dp - *dg);
            ++err_n;
          }
        }
      }
      if (uni == 0) continue;
      const double iou = static_cast<double>(inter) / static_cast<double>(uni);
      if (iou < iou_threshold || inter == 0) continue;
      const double mean_err = err_n > 0 ? err / static_cast<double>(err_n)
                                        : std::numeric_limits<double>::infinity();
      candidates.push_back({iou, gi, pi, mean_err});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.iou, a.gt, a.pred) < std::tie(a.iou, b.gt, b.pred);
  });

  std::vector<double> matched_error(gt.size(), std::numeric_limits<double>::infinity());
  std::vector<bool> gt_used(gt.size(), false);
  std::vector<bool> pred_used(pred.size(), false);
  for (const Candidate& c : candidates) {
    if (gt_used[c.gt] || pred_used[c.pred]) continue;
    gt_used[c.gt] = true;
    pred_used[c.pred] = true;
    matched_error[c.gt] = c.depth_error;
  }

  RecallCurve curve;
  curve.thresholds.assign(depth_thresholds.begin(), depth_thresholds.end());
  for (const double tau : depth_thresholds) {
    const auto hits = std::count_if(matched_error.begin(), matched_error.end(),
                                    [&](double e) { return e <= tau; });
    curve.recall.push_back(gt.empty() ? 0.0
                                      : static_cast<double>(hits) / static_cast<double>(gt.size()));
  }
  return curve;
}

SegmentationMetrics segmentation_metrics(const LabelRaster& pred, const LabelRaster& gt) {
  require_same(pred.resolution(), gt.resolution());
  SegmentationMetrics m{0.0, 1.0, 1.0};
  if (pred.empty()) return m;

  std::size_t np = 0;
  std::size_t ng = 0;
  const auto p = canonical_labels(pred, np);
  const auto g = canonical_labels(gt, ng);
  std::vector<double> joint(np * ng, 0.0);
  std::vector<double> pc(np, 0.0);
  std::vector<double> gc(ng, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    joint[p[i] * ng + g[i]] += 1.0;
    pc[p[i]] += 1.0;
    gc[g[i]] += 1.0;
  }
  const auto n = static_cast<double>(p.size());

  // VI = H(P|G) + H(G|P).
  double vi = 0.0;
  double same_both = 0.0;
  for (std::size_t a = 0; a < np; ++a) {
    for (std::size_t b = 0; b < ng; ++b) {
      const double nij = joint[a * ng + b];
      if (nij == 0.0) continue;
      vi -= nij / n * (std::log(nij / gc[b]) + std::log(nij / pc[a]));
      same_both += nij * (nij - 1.0) / 2.0;
    }
  }
  m.vi = std::max(0.0, vi);

  const double pairs = n * (n - 1.0) / 2.0;
  if (pairs > 0.0) {
    double same_p = 0.0;
    double same_g = 0.0;
    for (const double c : pc) same_p += c * (c - 1.0) / 2.0;
    for (const double c : gc) same_g += c * (c - 1.0) / 2.0;
    m.ri = (pairs - same_p - same_g + 2.0 * same_both) / pairs;
  }

  double sc = 0.0;
  for (std::size_t b = 0; b < ng; ++b) {
    double best = 0.0;
    for (std::size_t a = 0; a < np; ++a) {
      const double nij = joint[a * ng + b];
      if (nij == 0.0) continue;
      best = std::max(best, nij / (gc[b] + pc[a] - nij));
    }
    sc += gc[b] / n * best;
  }
  m.sc = sc;
  return m;
}

std::vector<PlaneInstance> plane_instances(const SMPI& smpi) {
  std::vector<PlaneInstance> out;
  const RigidTransform& pose = smpi.reference_camera().pose();
  for (std::size_t i = 0; i < smpi.num_planar(); ++i) {
    const Proxy& p = smpi.proxy(i);
    out.push_back(PlaneInstance{p.mask(), transform_plane(p.plane(), pose)});
  }
  return out;
}

LabelRaster plane_labels(const SMPI& smpi) {
  LabelRaster labels(smpi.resolution(), -1);
  for (std::size_t i = smpi.num_planar(); i-- > 0;) {
    const Mask& m = smpi.proxy(i).mask();
    for (std::size_t p = 0; p < m.size(); ++p) {
      if (m.pixels()[p]) labels.pixels()[p] = static_cast<std::int32_t>(i);
    }
  }
  return labels;
}

}  // namespace smpi
