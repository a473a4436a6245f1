#include "smpi/fusion.hpp"

#include <algorithm>
#include <array>
#include <vector>

namespace smpi {

MergedView merge_views(std::span<const ImageBuffer> renders) {
  if (renders.empty()) throw Error(ErrorCode::kEmptyInput, "nothing to merge");
  const Resolution res = renders.front().pixels.resolution();
  for (const ImageBuffer& r : renders) {
    if (r.pixels.resolution() != res || r.confidence.resolution() != res) {
      throw Error(ErrorCode::kDimensionMismatch, "renders differ in size");
    }
  }

  MergedView out{ImageBuffer{Raster<Rgb>(res), Raster<float>(res, 0.0F)}, Mask(res, 0), 0};
  // Contributions are summed in a canonical order so the result is bit-for-bit
  // independent of the input order.
  std::vector<std::array<float, 4>> terms(renders.size());
  for (std::size_t p = 0; p < res.pixel_count(); ++p) {
    for (std::size_t t = 0; t < renders.size(); ++t) {
      const Rgb& c = renders[t].pixels.pixels()[p];
      terms[t] = {renders[t].confidence.pixels()[p], c.r, c.g, c.b};
    }
    std::sort(terms.begin(), terms.end());
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;
    double weight = 0.0;
    float best = 0.0F;
    for (const auto& [w, cr, cg, cb] : terms) {
      r += static_cast<double>(w) * cr;
      g += static_cast<double>(w) * cg;
      b += static_cast<double>(w) * cb;
      weight += w;
      best = std::max(best, w);
    }
    if (weight > 0.0) {
      out.image.pixels.pixels()[p] = Rgb{static_cast<float>(r / weight),
                                         static_cast<float>(g / weight),
                                         static_cast<float>(b / weight)};
    }
    out.image.confidence.pixels()[p] = best;
    if (weight <= kHoleEpsilon) {
      out.holes.pixels()[p] = 1;
      ++out.hole_count;
    }
  }
  return out;
}

std::size_t count_holes(const ImageBuffer& render) {
  const auto conf = render.confidence.pixels();
  return static_cast<std::size_t>(
      std::count_if(conf.begin(), conf.end(), [](float c) { return c <= kHoleEpsilon; }));
}

}  // namespace smpi
