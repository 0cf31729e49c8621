#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "rdp/errors.hpp"
#include "rdp/geometry.hpp"

namespace rdp {

// Spacing-increasing discretization of [alpha, beta] into K log-uniform bins.
struct SidConfig {
  double alpha = 1.0;
  double beta = 80.0;
  int K = 80;

  void validate() const {
    if (!(0.0 < alpha && alpha < beta))
      throw std::invalid_argument("sid: need 0 < alpha < beta");
    if (K < 1) throw std::invalid_argument("sid: need K >= 1");
  }
};

// K+1 thresholds t_0..t_K with constant ratio; endpoints pinned exactly.
inline std::vector<double> sid_thresholds(const SidConfig& cfg) {
  cfg.validate();
  std::vector<double> t(std::size_t(cfg.K) + 1);
  const double la = std::log(cfg.alpha), lb = std::log(cfg.beta);
  for (int i = 1; i < cfg.K; ++i)
    t[i] = std::exp(la + double(i) * (lb - la) / cfg.K);
  t[0] = cfg.alpha;
  t[cfg.K] = cfg.beta;
  return t;
}

// Per-pixel bin indices with a validity mask.
struct OrdinalLabels {
  int width = 0, height = 0;
  int K = 0;
  std::vector<int> labels;          // bin index, meaningful where valid
  std::vector<std::uint8_t> valid;  // 1 = pixel carries a label

  std::size_t pixel_count() const { return labels.size(); }
};

// Bins are left-closed [t_i, t_{i+1}); depth = beta maps to K-1.
// Valid depths are clamped into [alpha, beta] first; zeros are masked out.
inline OrdinalLabels depth_to_label(const DepthMap& depth, const SidConfig& cfg) {
  const std::vector<double> t = sid_thresholds(cfg);
  OrdinalLabels out;
  out.width = depth.width;
  out.height = depth.height;
  out.K = cfg.K;
  out.labels.assign(depth.pixel_count(), 0);
  out.valid.assign(depth.pixel_count(), 0);
  for (std::size_t i = 0; i < depth.pixel_count(); ++i) {
    const double d0 = depth.data[i];
    if (d0 <= 0.0) continue;
    const double d = std::clamp(d0, cfg.alpha, cfg.beta);
    // first threshold strictly greater than d, minus one
    auto it = std::upper_bound(t.begin(), t.end(), d);
    int l = int(it - t.begin()) - 1;
    l = std::clamp(l, 0, cfg.K - 1);
    out.labels[i] = l;
    out.valid[i] = 1;
  }
  return out;
}

// Decode rule: count bins with P_k >= 0.5, return the midpoint of the
// bounding thresholds (clamped at the top bin).
inline double decode_probs(std::span<const double> probs, const SidConfig& cfg) {
  if (int(probs.size()) != cfg.K)
    throw std::invalid_argument("decode_probs: probability vector length != K");
  const std::vector<double> t = sid_thresholds(cfg);
  int l = 0;
  for (double p : probs)
    if (p >= 0.5) ++l;
  const int hi = std::min(l + 1, cfg.K);
  return 0.5 * (t[l] + t[hi]);
}

// Mean ordinal regression loss over valid pixels.
// probs is pixel-major: probs[pix * K + k] = P(label > k).
inline double ordinal_loss(std::span<const double> probs,
                           const OrdinalLabels& labels, double clamp_eps = 1e-7) {
  const int K = labels.K;
  if (probs.size() != labels.pixel_count() * std::size_t(K))
    throw std::invalid_argument("ordinal_loss: probs size mismatch");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t pix = 0; pix < labels.pixel_count(); ++pix) {
    if (!labels.valid[pix]) continue;
    ++n;
    const int l = labels.labels[pix];
    for (int k = 0; k < K; ++k) {
      double p = std::clamp(probs[pix * K + k], clamp_eps, 1.0 - clamp_eps);
      sum += (k < l) ? -std::log(p) : -std::log(1.0 - p);
    }
  }
  if (n == 0) throw EmptyMaskError("ordinal_loss: no valid pixels");
  return sum / double(n);
}

// Score-pair parameterization: two scores per bin,
// P_k = exp(s_k1) / (exp(s_k0) + exp(s_k1)) = sigmoid(s_k1 - s_k0).
// scores is pixel-major: scores[(pix * K + k) * 2 + {0,1}].
inline double probs_from_scores(double s0, double s1) {
  // numerically stable sigmoid of (s1 - s0)
  const double d = s1 - s0;
  return d >= 0.0 ? 1.0 / (1.0 + std::exp(-d))
                  : std::exp(d) / (1.0 + std::exp(d));
}

inline double ordinal_loss_from_scores(std::span<const double> scores,
                                       const OrdinalLabels& labels,
                                       double clamp_eps = 1e-7) {
  const int K = labels.K;
  if (scores.size() != labels.pixel_count() * std::size_t(K) * 2)
    throw std::invalid_argument("ordinal_loss_from_scores: size mismatch");
  std::vector<double> probs(labels.pixel_count() * std::size_t(K));
  for (std::size_t i = 0; i < probs.size(); ++i)
    probs[i] = probs_from_scores(scores[2 * i], scores[2 * i + 1]);
  return ordinal_loss(probs, labels, clamp_eps);
}

// Analytic gradient of the mean loss with respect to every score.
// Masked pixels contribute zero gradient.
inline std::vector<double> ordinal_loss_grad(std::span<const double> scores,
                                             const OrdinalLabels& labels) {
  const int K = labels.K;
  if (scores.size() != labels.pixel_count() * std::size_t(K) * 2)
    throw std::invalid_argument("ordinal_loss_grad: size mismatch");
  std::vector<double> grad(scores.size(), 0.0);
  std::size_t n = 0;
  for (std::size_t pix = 0; pix < labels.pixel_count(); ++pix)
    if (labels.valid[pix]) ++n;
  if (n == 0) return grad;
  const double inv_n = 1.0 / double(n);
  for (std::size_t pix = 0; pix < labels.pixel_count(); ++pix) {
    if (!labels.valid[pix]) continue;
    const int l = labels.labels[pix];
    for (int k = 0; k < K; ++k) {
      const std::size_t base = (pix * K + std::size_t(k)) * 2;
      const double p = probs_from_scores(scores[base], scores[base + 1]);
      // d(-ln P)/ds1 = -(1-P);  d(-ln(1-P))/ds1 = P;  s0 gets the negation.
      const double g1 = (k < l) ? -(1.0 - p) : p;
      grad[base] = -g1 * inv_n;
      grad[base + 1] = g1 * inv_n;
    }
  }
  return grad;
}

}  // namespace rdp
