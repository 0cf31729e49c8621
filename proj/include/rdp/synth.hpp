#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "rdp/geometry.hpp"
#include "rdp/radar_pipeline.hpp"

namespace rdp {

// Deterministic RNG with portable output (mt19937_64 raw words only; the
// distribution math is spelled out so results do not depend on the stdlib).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() { return double(gen_() >> 11) * 0x1.0p-53; }

  double gaussian() {
    const double u1 = std::max(uniform01(), 1e-300);
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  std::uint64_t next() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

struct Box {
  Vec3 center;
  Vec3 extent;  // full side lengths
};

// Parametric world: a ground plane plus axis-aligned boxes, camera frame
// (+z forward, +y down), camera ground_height meters above the ground.
struct Scene {
  double ground_height = 1.0;
  std::vector<Box> obstacles;
  double far_plane = 80.0;

  void validate() const {
    for (const Box& b : obstacles) {
      if (b.extent.x <= 0.0 || b.extent.y <= 0.0 || b.extent.z <= 0.0)
        throw std::invalid_argument("scene: box extents must be positive");
      if (b.center.z + b.extent.z / 2.0 <= 0.0)
        throw std::invalid_argument("scene: box must lie in front of the camera");
    }
  }
};

struct RadarModel {
  double plane_height = 0.5;   // meters above ground
  double depth_noise_sigma = 0.0;
  double azimuth_step = 0.02;  // radians
  double dropout_prob = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (depth_noise_sigma < 0.0)
      throw std::invalid_argument("radar model: sigma must be >= 0");
    if (!(azimuth_step > 0.0))
      throw std::invalid_argument("radar model: azimuth_step must be > 0");
    if (dropout_prob < 0.0 || dropout_prob > 1.0)
      throw std::invalid_argument("radar model: dropout_prob must be in [0,1]");
  }
};

namespace detail {

// Ray/box slab intersection; ray is origin + t * dir. Returns entry t or
// negative on miss.
inline double intersect_box(const Vec3& origin, const Vec3& dir, const Box& box) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  const double o[3] = {origin.x, origin.y, origin.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  const double c[3] = {box.center.x, box.center.y, box.center.z};
  const double e[3] = {box.extent.x / 2.0, box.extent.y / 2.0, box.extent.z / 2.0};
  for (int i = 0; i < 3; ++i) {
    const double lo = c[i] - e[i], hi = c[i] + e[i];
    if (d[i] == 0.0) {
      if (o[i] < lo || o[i] > hi) return -1.0;
      continue;
    }
    double t0 = (lo - o[i]) / d[i];
    double t1 = (hi - o[i]) / d[i];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return -1.0;
  }
  return t_far < 0.0 ? -1.0 : std::max(t_near, 0.0);
}

}  // namespace detail

// Per-pixel ray casting against the ground plane and all boxes; nearest hit
// z-depth, 0 where nothing is hit within far_plane.
inline DepthMap render_gt_depth(const Scene& scene, const CameraIntrinsics& intr) {
  scene.validate();
  DepthMap map(intr.width, intr.height);
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const Vec3 dir{(u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0};
      double best = std::numeric_limits<double>::infinity();
      if (dir.y > 0.0) {
        const double t = scene.ground_height / dir.y;  // depth: dir.z == 1
        best = std::min(best, t);
      }
      for (const Box& b : scene.obstacles) {
        const double t = detail::intersect_box({0, 0, 0}, dir, b);
        if (t > 1e-9) best = std::min(best, t);
      }
      if (best <= scene.far_plane) map.at(u, v) = float(best);
    }
  }
  return map;
}

// Row-banded subsampling of valid gt pixels: every stride-th row is a "beam",
// pixels on beam rows are kept with a probability chosen so the overall
// expected density matches. Depths are copied exactly.
inline DepthMap sample_lidar(const DepthMap& gt, double density,
                             std::uint64_t seed) {
  if (!(density > 0.0 && density <= 1.0))
    throw std::invalid_argument("sample_lidar: density must be in (0, 1]");
  Rng rng(seed);
  const int max_stride = std::max(1, int(1.0 / density));
  const int stride =
      std::clamp(int(std::lround(std::sqrt(1.0 / density))), 1, max_stride);
  const double keep_prob = std::min(1.0, density * stride);
  const int phase = int(rng.next() % std::uint64_t(stride));

  DepthMap out(gt.width, gt.height);
  for (int y = 0; y < gt.height; ++y) {
    if (y % stride != phase) continue;
    for (int x = 0; x < gt.width; ++x) {
      if (!gt.valid_at(x, y)) continue;
      if (rng.uniform01() < keep_prob) out.at(x, y) = gt.at(x, y);
    }
  }
  return out;
}

// Casts rays inside the horizontal plane at plane_height above ground,
// quantized by azimuth_step over the camera field of view. Each hit yields a
// point with Gaussian range noise; returns are dropped with dropout_prob.
// Points are expressed in the camera frame; transforms are identity.
inline RadarFrame sample_radar(const Scene& scene, const CameraIntrinsics& intr,
                               const RadarModel& model) {
  scene.validate();
  model.validate();
  Rng rng(model.seed);
  RadarFrame frame;
  frame.sensor_to_ego = RigidTransform::identity();
  frame.ego_to_global = RigidTransform::identity();

  const double y_plane = scene.ground_height - model.plane_height;
  const double a_min = std::atan2(0.0 - intr.cx, intr.fx);
  const double a_max = std::atan2(double(intr.width) - intr.cx, intr.fx);
  const long k_min = long(std::ceil(a_min / model.azimuth_step - 0.5));
  const long k_max = long(std::floor(a_max / model.azimuth_step - 0.5));

  for (long k = k_min; k <= k_max; ++k) {
    const double a = (double(k) + 0.5) * model.azimuth_step;
    const Vec3 origin{0.0, y_plane, 0.0};
    const Vec3 dir{std::sin(a), 0.0, std::cos(a)};
    double best = std::numeric_limits<double>::infinity();
    for (const Box& b : scene.obstacles) {
      const double t = detail::intersect_box(origin, dir, b);
      if (t > 1e-9) best = std::min(best, t);
    }
    if (!(best * dir.z <= scene.far_plane)) continue;
    if (rng.uniform01() < model.dropout_prob) continue;
    const double range = best + model.depth_noise_sigma * rng.gaussian();
    if (range <= 1e-3) continue;
    frame.points.points.push_back(origin + dir * range);
  }
  return frame;
}

// The built-in default street scene: ground plane, two rows of box obstacles
// flanking a corridor, and a far wall.
inline Scene default_street_scene() {
  Scene s;
  s.ground_height = 1.0;
  s.far_plane = 80.0;
  // cars / cabinets along both sides, full-height so they intersect both the
  // radar plane (0.5 m) and the whole extension range (0.25..2 m)
  const double top = 1.0 - 2.4;  // camera-frame y of obstacle tops
  auto add = [&](double cx, double cz, double ex, double ez) {
    Box b;
    b.center = {cx, (top + 1.0) / 2.0, cz};
    b.extent = {ex, 2.4, ez};
    s.obstacles.push_back(b);
  };
  add(-4.0, 9.0, 2.2, 4.5);
  add(4.5, 12.0, 2.2, 4.5);
  add(-3.5, 18.0, 2.2, 4.5);
  add(5.0, 24.0, 2.2, 4.5);
  add(-4.5, 30.0, 2.2, 4.5);
  add(4.0, 38.0, 2.2, 4.5);
  add(-1.0, 52.0, 10.0, 2.0);  // far blocker across the corridor
  return s;
}

}  // namespace rdp
