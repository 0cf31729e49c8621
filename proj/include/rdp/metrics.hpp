#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "rdp/errors.hpp"
#include "rdp/geometry.hpp"

namespace rdp {

struct EvalReport {
  double delta1 = 0.0, delta2 = 0.0, delta3 = 0.0;
  double rmse = 0.0;
  double abs_rel = 0.0;
  std::size_t valid_pixel_count = 0;
};

// Masked depth metrics. The mask is "gt valid and inside [min,max]";
// predictions are not clamped or masked on their own value.
// Delta thresholds use strict <, so a ratio of exactly 1.25^i fails.
inline EvalReport evaluate(const DepthMap& pred, const DepthMap& gt,
                           double range_min, double range_max) {
  if (!pred.same_size(gt))
    throw std::invalid_argument("evaluate: dimension mismatch");
  if (!(range_min < range_max))
    throw std::invalid_argument("evaluate: range min must be < max");

  const double d1 = 1.25, d2 = 1.25 * 1.25, d3 = 1.25 * 1.25 * 1.25;
  std::size_t n = 0, c1 = 0, c2 = 0, c3 = 0;
  double sq_sum = 0.0, rel_sum = 0.0;
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    const double g = gt.data[i];
    if (g <= 0.0 || g < range_min || g > range_max) continue;
    const double p = pred.data[i];
    ++n;
    const double ratio = std::max(p / g, g / p);
    if (ratio < d1) ++c1;
    if (ratio < d2) ++c2;
    if (ratio < d3) ++c3;
    sq_sum += (p - g) * (p - g);
    rel_sum += std::abs(p - g) / g;
  }
  if (n == 0) throw EmptyMaskError("evaluate: no valid ground-truth pixels in range");

  EvalReport r;
  r.valid_pixel_count = n;
  r.delta1 = double(c1) / n;
  r.delta2 = double(c2) / n;
  r.delta3 = double(c3) / n;
  r.rmse = std::sqrt(sq_sum / n);
  r.abs_rel = rel_sum / n;
  return r;
}

inline std::size_t count_points(const DepthMap& map) {
  std::size_t n = 0;
  for (float v : map.data)
    if (v > 0.0f) ++n;
  return n;
}

}  // namespace rdp
