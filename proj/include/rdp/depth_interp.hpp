#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rdp/errors.hpp"
#include "rdp/geometry.hpp"

namespace rdp {

struct GuidanceImage {
  int width = 0, height = 0;
  std::vector<float> luminance;  // row-major, values in [0,1]

  GuidanceImage() = default;
  GuidanceImage(int w, int h)
      : width(w), height(h), luminance(std::size_t(w) * h, 0.0f) {}

  float at(int x, int y) const { return luminance[std::size_t(y) * width + x]; }
  float& at(int x, int y) { return luminance[std::size_t(y) * width + x]; }
};

inline float luminance_from_rgb(float r, float g, float b) {
  return 0.299f * r + 0.587f * g + 0.114f * b;
}

struct InterpolationConfig {
  int neighborhood = 8;             // 4- or 8-connected
  double epsilon_var = 1e-4;        // luminance variance floor
  double solver_tolerance = 1e-6;   // relative residual
  std::size_t max_iterations = 0;   // 0 = 10 * pixel count

  void validate() const {
    if (neighborhood != 4 && neighborhood != 8)
      throw std::invalid_argument("interp: neighborhood must be 4 or 8");
    if (!(solver_tolerance > 0.0))
      throw std::invalid_argument("interp: solver_tolerance must be > 0");
    if (!(epsilon_var > 0.0))
      throw std::invalid_argument("interp: epsilon_var must be > 0");
  }
};

struct SolveStats {
  std::size_t iterations = 0;
  double residual = 0.0;  // relative residual of L x = b at exit
};

struct ObjectiveReport {
  double objective = 0.0;           // sum of squared row residuals, free rows only
  double max_seed_mismatch = 0.0;   // max |candidate - seed| at seed pixels
};

namespace detail {

struct NeighborWeights {
  // flat per-pixel neighbor lists; only meaningful for free pixels
  std::vector<std::size_t> offsets;    // size = pixels + 1
  std::vector<std::size_t> neighbor;   // pixel index of s
  std::vector<double> weight;          // w_rs, normalized per r
};

inline const int* neighbor_offsets(int connectivity) {
  static const int off8[16] = {-1, -1, 0, -1, 1, -1, -1, 0,
                               1,  0,  -1, 1, 0,  1,  1,  1};
  static const int off4[8] = {0, -1, -1, 0, 1, 0, 0, 1};
  return connectivity == 8 ? off8 : off4;
}

// Row-normalized guidance weights w_rs = exp(-(Y(r)-Y(s))^2 / (2 sigma_r^2)),
// sigma_r^2 = local luminance variance over the window {r} + N(r), floored.
inline NeighborWeights build_weights(const GuidanceImage& guide,
                                     const InterpolationConfig& cfg) {
  const int w = guide.width, h = guide.height;
  const int nn = cfg.neighborhood;
  const int* off = neighbor_offsets(nn);
  NeighborWeights out;
  out.offsets.assign(std::size_t(w) * h + 1, 0);
  out.neighbor.reserve(std::size_t(w) * h * nn);
  out.weight.reserve(std::size_t(w) * h * nn);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t r = std::size_t(y) * w + x;
      const double yr = guide.at(x, y);
      // window statistics (center included)
      double sum = yr, sum_sq = yr * yr;
      int count = 1;
      for (int k = 0; k < nn; ++k) {
        const int sx = x + off[2 * k], sy = y + off[2 * k + 1];
        if (sx < 0 || sx >= w || sy < 0 || sy >= h) continue;
        const double ys = guide.at(sx, sy);
        sum += ys;
        sum_sq += ys * ys;
        ++count;
      }
      const double mean = sum / count;
      const double var = std::max(sum_sq / count - mean * mean, cfg.epsilon_var);

      const std::size_t begin = out.neighbor.size();
      double wsum = 0.0;
      for (int k = 0; k < nn; ++k) {
        const int sx = x + off[2 * k], sy = y + off[2 * k + 1];
        if (sx < 0 || sx >= w || sy < 0 || sy >= h) continue;
        const double dy = yr - guide.at(sx, sy);
        const double wk = std::exp(-dy * dy / (2.0 * var));
        out.neighbor.push_back(std::size_t(sy) * w + sx);
        out.weight.push_back(wk);
        wsum += wk;
      }
      for (std::size_t i = begin; i < out.weight.size(); ++i)
        out.weight[i] /= wsum;
      out.offsets[r + 1] = out.neighbor.size();
    }
  }
  return out;
}

}  // namespace detail

// Quadratic objective of a candidate field: sum over unconstrained pixels of
// (D(r) - sum_s w_rs D(s))^2. Seed rows are excluded; how far the candidate
// drifts from the seeds is reported separately.
inline ObjectiveReport system_residual(const DepthMap& seeds,
                                       const GuidanceImage& guide,
                                       const DepthMap& candidate,
                                       const InterpolationConfig& cfg) {
  cfg.validate();
  if (seeds.width != guide.width || seeds.height != guide.height ||
      !seeds.same_size(candidate))
    throw std::invalid_argument("system_residual: dimension mismatch");
  const detail::NeighborWeights nw = detail::build_weights(guide, cfg);
  ObjectiveReport rep;
  for (std::size_t r = 0; r < seeds.pixel_count(); ++r) {
    if (seeds.data[r] > 0.0f) {
      rep.max_seed_mismatch = std::max(
          rep.max_seed_mismatch,
          std::abs(double(candidate.data[r]) - double(seeds.data[r])));
      continue;
    }
    double acc = candidate.data[r];
    for (std::size_t i = nw.offsets[r]; i < nw.offsets[r + 1]; ++i)
      acc -= nw.weight[i] * double(candidate.data[nw.neighbor[i]]);
    rep.objective += acc * acc;
  }
  return rep;
}

// Edge-aware propagation of sparse seed depths to every pixel. Seeds are hard
// constraints (eliminated from the system); the free part solves
// (I - W)_ff D_f = W_fc seed via conjugate gradients on the normal equations
// with Jacobi preconditioning.
inline DepthMap interpolate_dense(const DepthMap& seeds,
                                  const GuidanceImage& guide,
                                  const InterpolationConfig& cfg,
                                  SolveStats* stats = nullptr) {
  cfg.validate();
  if (seeds.width != guide.width || seeds.height != guide.height)
    throw std::invalid_argument("interpolate_dense: dimension mismatch");

  const std::size_t pixels = seeds.pixel_count();
  std::vector<std::size_t> free_index(pixels, std::size_t(-1));
  std::vector<std::size_t> free_pixels;
  double seed_sum = 0.0;
  std::size_t seed_count = 0;
  for (std::size_t i = 0; i < pixels; ++i) {
    if (seeds.data[i] > 0.0f) {
      seed_sum += seeds.data[i];
      ++seed_count;
    } else {
      free_index[i] = free_pixels.size();
      free_pixels.push_back(i);
    }
  }
  if (seed_count == 0)
    throw std::invalid_argument("interpolate_dense: no seed pixels");

  DepthMap out = seeds;
  if (free_pixels.empty()) {
    if (stats) *stats = {};
    return out;
  }

  const detail::NeighborWeights nw = detail::build_weights(guide, cfg);
  const std::size_t n = free_pixels.size();

  // CSR for L = (I - W)_ff and rhs b = W_fc * seeds
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<std::size_t> col;
  std::vector<double> val;
  std::vector<double> b(n, 0.0);
  for (std::size_t fi = 0; fi < n; ++fi) {
    const std::size_t r = free_pixels[fi];
    col.push_back(fi);
    val.push_back(1.0);
    for (std::size_t i = nw.offsets[r]; i < nw.offsets[r + 1]; ++i) {
      const std::size_t s = nw.neighbor[i];
      if (free_index[s] != std::size_t(-1)) {
        col.push_back(free_index[s]);
        val.push_back(-nw.weight[i]);
      } else {
        b[fi] += nw.weight[i] * double(seeds.data[s]);
      }
    }
    row_ptr[fi + 1] = col.size();
  }

  auto apply_L = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = row_ptr[i]; j < row_ptr[i + 1]; ++j)
        acc += val[j] * x[col[j]];
      y[i] = acc;
    }
  };
  auto apply_Lt = [&](const std::vector<double>& x, std::vector<double>& y) {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = row_ptr[i]; j < row_ptr[i + 1]; ++j)
        y[col[j]] += val[j] * x[i];
  };

  // Jacobi preconditioner: diag(L^T L)
  std::vector<double> diag(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = row_ptr[i]; j < row_ptr[i + 1]; ++j)
      diag[col[j]] += val[j] * val[j];

  const std::size_t max_iter =
      cfg.max_iterations ? cfg.max_iterations : 10 * pixels;

  std::vector<double> x(n, seed_sum / double(seed_count));
  std::vector<double> s(n), r(n), z(n), p(n), q(n);

  double b_norm = 0.0;
  for (double v : b) b_norm += v * v;
  b_norm = std::sqrt(b_norm);
  if (b_norm == 0.0) b_norm = 1.0;

  apply_L(x, s);
  for (std::size_t i = 0; i < n; ++i) s[i] = b[i] - s[i];
  apply_Lt(s, r);
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  p = z;
  double gamma = 0.0;
  for (std::size_t i = 0; i < n; ++i) gamma += r[i] * z[i];

  auto rel_residual = [&] {
    double acc = 0.0;
    for (double v : s) acc += v * v;
    return std::sqrt(acc) / b_norm;
  };

  std::size_t it = 0;
  double res = rel_residual();
  while (res > cfg.solver_tolerance && it < max_iter) {
    apply_L(p, q);
    double qq = 0.0;
    for (double v : q) qq += v * v;
    if (qq == 0.0) break;
    const double alpha = gamma / qq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      s[i] -= alpha * q[i];
    }
    apply_Lt(s, r);
    double gamma_new = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = r[i] / diag[i];
      gamma_new += r[i] * z[i];
    }
    const double beta = gamma_new / gamma;
    gamma = gamma_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    ++it;
    res = rel_residual();
  }
  if (stats) *stats = {it, res};
  if (res > cfg.solver_tolerance)
    throw ConvergenceError("interpolate_dense: solver did not converge, residual " +
                               std::to_string(res),
                           res, int(it));

  for (std::size_t fi = 0; fi < n; ++fi)
    out.data[free_pixels[fi]] = float(x[fi]);
  return out;
}

}  // namespace rdp
