#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "rdp/errors.hpp"
#include "rdp/geometry.hpp"
#include "rdp/metrics.hpp"

namespace rdp {

struct RadarFrame {
  PointCloud points;  // sensor frame
  double timestamp = 0.0;
  RigidTransform sensor_to_ego;
  RigidTransform ego_to_global;
};

struct HeightExtensionConfig {
  double h_min = 0.25;        // meters above ground
  double h_max = 2.0;
  double base_height = 0.5;   // nominal height of planar radar returns

  void validate() const {
    if (!(h_min < h_max) && h_min != h_max)
      throw std::invalid_argument("height extension: need h_min <= h_max");
    if (base_height < h_min || base_height > h_max)
      throw std::invalid_argument(
          "height extension: base_height outside [h_min, h_max]");
  }
};

struct FilterConfig {
  double ratio_threshold = 1.5625;  // delta2 = 1.25^2

  void validate() const {
    if (!(ratio_threshold > 1.0))
      throw std::invalid_argument("filter: ratio_threshold must be > 1");
  }
};

struct IntrinsicErrorReport {
  double delta1 = 0.0;
  double rmse = 0.0;
  std::size_t point_count = 0;
  double retained_fraction = 1.0;
};

// Maps every frame's points sensor -> ego -> global -> target ego -> camera
// and concatenates. No deduplication; attributes are carried through.
inline PointCloud accumulate_frames(const std::vector<RadarFrame>& frames,
                                    std::size_t target,
                                    const RigidTransform& camera_from_ego) {
  if (frames.empty())
    throw std::invalid_argument("accumulate_frames: empty frame list");
  if (target >= frames.size())
    throw std::invalid_argument("accumulate_frames: target out of range");

  const RigidTransform global_to_target_ego =
      frames[target].ego_to_global.inverse();
  PointCloud out;
  bool any_attrs = false;
  for (const RadarFrame& f : frames)
    if (f.points.has_attributes()) any_attrs = true;

  for (const RadarFrame& f : frames) {
    RigidTransform to_camera = compose(
        camera_from_ego,
        compose(global_to_target_ego, compose(f.ego_to_global, f.sensor_to_ego)));
    for (std::size_t i = 0; i < f.points.size(); ++i) {
      out.points.push_back(to_camera.apply(f.points.points[i]));
      if (any_attrs)
        out.attributes.push_back(f.points.has_attributes()
                                     ? f.points.attributes[i]
                                     : std::array<double, 3>{0, 0, 0});
    }
  }
  return out;
}

// Projects points and keeps the smallest depth on pixel collisions.
inline DepthMap render_sparse_depth(const PointCloud& points,
                                    const CameraIntrinsics& intr) {
  DepthMap map(intr.width, intr.height);
  for (const PixelDepth& pd : project_points(points, intr)) {
    float& cell = map.at(pd.u, pd.v);
    const float d = float(pd.depth);
    if (cell == 0.0f || d < cell) cell = d;
  }
  return map;
}

// Replaces each point by a vertical segment spanning [h_min, h_max] above the
// ground plane at the point's (x, z), sampled densely enough that consecutive
// projected samples differ by at most one pixel row. Each sample is splatted
// with its own camera-frame depth; min wins on collision.
// ground_y is the camera-frame y of the ground plane (+y down).
inline DepthMap extend_height(const PointCloud& points,
                              const CameraIntrinsics& intr,
                              const HeightExtensionConfig& cfg, double ground_y) {
  cfg.validate();
  DepthMap map(intr.width, intr.height);
  const double span = cfg.h_max - cfg.h_min;
  PointCloud samples;
  for (const Vec3& p : points.points) {
    if (p.z <= 0.0) continue;
    // number of samples so that fy * span / z steps cover <= 1 px each
    const int steps = std::max(1, int(std::ceil(intr.fy * span / p.z)));
    const int count = span == 0.0 ? 1 : steps + 1;
    for (int i = 0; i < count; ++i) {
      const double h =
          count == 1 ? cfg.h_min : cfg.h_min + span * double(i) / (count - 1);
      samples.points.push_back({p.x, ground_y - h, p.z});
    }
  }
  for (const PixelDepth& pd : project_points(samples, intr)) {
    float& cell = map.at(pd.u, pd.v);
    const float d = float(pd.depth);
    if (cell == 0.0f || d < cell) cell = d;
  }
  return map;
}

// A radar pixel survives iff the reference pixel is valid and
// max(radar/ref, ref/radar) < ratio_threshold.
inline DepthMap filter_by_ratio(const DepthMap& radar, const DepthMap& reference,
                                const FilterConfig& cfg) {
  cfg.validate();
  if (!radar.same_size(reference))
    throw std::invalid_argument("filter_by_ratio: dimension mismatch");
  DepthMap out(radar.width, radar.height);
  for (std::size_t i = 0; i < radar.pixel_count(); ++i) {
    const double r = radar.data[i];
    const double ref = reference.data[i];
    if (r <= 0.0 || ref <= 0.0) continue;
    const double ratio = std::max(r / ref, ref / r);
    if (ratio < cfg.ratio_threshold) out.data[i] = radar.data[i];
  }
  return out;
}

// delta1/RMSE over pixels where both maps are valid. point_count counts valid
// radar pixels; retained_fraction is relative to baseline_count (pass 0 to use
// the map itself as its own baseline).
inline IntrinsicErrorReport intrinsic_error(const DepthMap& radar,
                                            const DepthMap& reference,
                                            std::size_t baseline_count = 0) {
  if (!radar.same_size(reference))
    throw std::invalid_argument("intrinsic_error: dimension mismatch");
  std::size_t overlap = 0, c1 = 0;
  double sq_sum = 0.0;
  for (std::size_t i = 0; i < radar.pixel_count(); ++i) {
    const double r = radar.data[i];
    const double g = reference.data[i];
    if (r <= 0.0 || g <= 0.0) continue;
    ++overlap;
    if (std::max(r / g, g / r) < 1.25) ++c1;
    sq_sum += (r - g) * (r - g);
  }
  if (overlap == 0)
    throw EmptyMaskError("intrinsic_error: no overlapping valid pixels");

  IntrinsicErrorReport rep;
  rep.delta1 = double(c1) / double(overlap);
  rep.rmse = std::sqrt(sq_sum / double(overlap));
  rep.point_count = count_points(radar);
  rep.retained_fraction =
      baseline_count == 0 ? 1.0 : double(rep.point_count) / double(baseline_count);
  return rep;
}

}  // namespace rdp
