#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include "rdp/depth_interp.hpp"
#include "rdp/geometry.hpp"
#include "rdp/radar_pipeline.hpp"
#include "rdp/synth.hpp"

namespace rdp {

// ---------------------------------------------------------------------------
// Deterministic frame-parallel map: results are written by index, so the
// output is identical for any thread count. Thread count comes from the
// RDP_THREADS environment variable (default 1).
// ---------------------------------------------------------------------------

inline int thread_count_from_env() {
  const char* env = std::getenv("RDP_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  if (n <= 0) return int(std::max(1u, std::thread::hardware_concurrency()));
  return n;
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const int threads = thread_count_from_env();
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> futures;
  const std::size_t chunk = (n + threads - 1) / std::size_t(threads);
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    const std::size_t end = std::min(n, begin + chunk);
    futures.push_back(std::async(std::launch::async, [&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    }));
  }
  for (auto& f : futures) f.get();
}

// ---------------------------------------------------------------------------
// Synthetic dataset generation
// ---------------------------------------------------------------------------

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer over seed ^ salted counter
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline CameraIntrinsics default_intrinsics() {
  CameraIntrinsics intr;
  intr.fx = 100.0;
  intr.fy = 100.0;
  intr.cx = 80.0;
  intr.cy = 60.0;
  intr.width = 160;
  intr.height = 120;
  return intr;
}

inline RadarModel default_radar_model() {
  RadarModel m;
  m.plane_height = 0.5;
  m.depth_noise_sigma = 3.0;
  m.azimuth_step = 0.035;  // ~40 beams across the default field of view
  m.dropout_prob = 0.3;
  m.seed = 0;  // per-frame seeds are derived by the generator
  return m;
}

struct SynthConfig {
  Scene scene = default_street_scene();
  CameraIntrinsics intrinsics = default_intrinsics();
  RadarModel radar = default_radar_model();
  double lidar_density = 0.15;
  double ego_step = 0.5;  // meters forward per frame
  std::uint64_t seed = 1;
  int frame_count = 50;
};

struct SynthFrame {
  RadarFrame radar;   // points in sensor (= ego = camera) frame, pose set
  DepthMap gt;
  DepthMap lidar;
};

// Scene as seen from frame i's camera: the ego advances along +z, so the
// global-frame boxes slide backwards.
inline Scene scene_at_frame(const SynthConfig& cfg, int frame) {
  Scene s = cfg.scene;
  s.obstacles.clear();
  const double shift = cfg.ego_step * frame;
  for (Box b : cfg.scene.obstacles) {
    b.center.z -= shift;
    if (b.center.z + b.extent.z / 2.0 > 0.0) s.obstacles.push_back(b);
  }
  return s;
}

inline RigidTransform ego_pose_at_frame(const SynthConfig& cfg, int frame) {
  RigidTransform t;
  t.translation = {0.0, 0.0, cfg.ego_step * frame};
  return t;
}

inline SynthFrame generate_frame(const SynthConfig& cfg, int frame) {
  const Scene local = scene_at_frame(cfg, frame);
  SynthFrame out;
  out.gt = render_gt_depth(local, cfg.intrinsics);
  out.lidar = sample_lidar(out.gt, cfg.lidar_density, mix_seed(cfg.seed, 2 * frame));
  RadarModel model = cfg.radar;
  model.seed = mix_seed(cfg.seed, 2 * frame + 1);
  out.radar = sample_radar(local, cfg.intrinsics, model);
  out.radar.timestamp = 0.1 * frame;
  out.radar.ego_to_global = ego_pose_at_frame(cfg, frame);
  return out;
}

// Synthetic guidance: depth shaded into [0,1] so obstacle boundaries become
// luminance edges; empty sky is bright.
inline GuidanceImage guidance_from_depth(const DepthMap& gt, double far_plane) {
  GuidanceImage g(gt.width, gt.height);
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    const double d = gt.data[i];
    g.luminance[i] =
        d > 0.0 ? float(0.1 + 0.8 * (1.0 - std::min(d / far_plane, 1.0))) : 0.95f;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Preprocessing pipeline and the intrinsic-error table
// ---------------------------------------------------------------------------

struct PipelineConfig {
  int window = 5;  // frames accumulated per target (current + window-1 past)
  HeightExtensionConfig extension;
  FilterConfig filter;
  double ground_y = 1.0;  // camera-frame y of the ground plane
  RigidTransform camera_from_ego;
};

struct Table1Row {
  std::string modality;
  std::string threshold;  // "-" or "d2"
  double delta1 = 0.0;
  double rmse = 0.0;
  double point_count = 0.0;
  double retained_pct = 0.0;
  std::size_t frames = 0;
};

enum class ReferenceKind { kGroundTruth, kInterpolated };

// Accumulates a window ending at `target` and renders both radar variants.
struct RenderedTarget {
  DepthMap raw;
  DepthMap extended;
};

inline RenderedTarget render_target(const std::vector<RadarFrame>& frames,
                                    std::size_t target,
                                    const CameraIntrinsics& intr,
                                    const PipelineConfig& cfg) {
  const std::size_t begin = target + 1 >= std::size_t(cfg.window)
                                ? target + 1 - std::size_t(cfg.window)
                                : 0;
  const std::vector<RadarFrame> window(frames.begin() + long(begin),
                                       frames.begin() + long(target) + 1);
  const PointCloud cloud =
      accumulate_frames(window, window.size() - 1, cfg.camera_from_ego);
  RenderedTarget out;
  out.raw = render_sparse_depth(cloud, intr);
  out.extended = extend_height(cloud, intr, cfg.extension, cfg.ground_y);
  return out;
}

struct FrameErrors {
  bool ok = false;
  IntrinsicErrorReport raw, raw_filtered, extended, extended_filtered;
};

inline FrameErrors frame_intrinsic_errors(const RenderedTarget& maps,
                                          const DepthMap& reference,
                                          const FilterConfig& filter) {
  FrameErrors e;
  const std::size_t raw_count = count_points(maps.raw);
  const std::size_t ext_count = count_points(maps.extended);
  if (raw_count == 0 || ext_count == 0) return e;
  try {
    e.raw = intrinsic_error(maps.raw, reference, raw_count);
    e.extended = intrinsic_error(maps.extended, reference, ext_count);
    e.raw_filtered =
        intrinsic_error(filter_by_ratio(maps.raw, reference, filter), reference,
                        raw_count);
    e.extended_filtered =
        intrinsic_error(filter_by_ratio(maps.extended, reference, filter),
                        reference, ext_count);
  } catch (const EmptyMaskError&) {
    return e;  // frame contributes nothing
  }
  e.ok = true;
  return e;
}

inline DepthMap make_reference(const SynthFrame& frame, ReferenceKind kind,
                               double far_plane) {
  if (kind == ReferenceKind::kGroundTruth) return frame.gt;
  InterpolationConfig icfg;
  return interpolate_dense(frame.lidar, guidance_from_depth(frame.gt, far_plane),
                           icfg);
}

// The four-row intrinsic-error table (raw / raw+filter / extended /
// extended+filter), averaged over all complete windows in the dataset.
inline std::vector<Table1Row> compute_table1(const std::vector<SynthFrame>& frames,
                                             const CameraIntrinsics& intr,
                                             const PipelineConfig& cfg,
                                             ReferenceKind ref_kind,
                                             double far_plane) {
  if (frames.empty())
    throw std::invalid_argument("compute_table1: empty dataset");
  std::vector<RadarFrame> radar_frames;
  radar_frames.reserve(frames.size());
  for (const SynthFrame& f : frames) radar_frames.push_back(f.radar);

  const std::size_t first_target =
      std::min(frames.size() - 1, std::size_t(cfg.window - 1));
  const std::size_t targets = frames.size() - first_target;
  std::vector<FrameErrors> errors(targets);
  parallel_for(targets, [&](std::size_t i) {
    const std::size_t t = first_target + i;
    const RenderedTarget maps = render_target(radar_frames, t, intr, cfg);
    const DepthMap reference = make_reference(frames[t], ref_kind, far_plane);
    errors[i] = frame_intrinsic_errors(maps, reference, cfg.filter);
  });

  std::vector<Table1Row> rows(4);
  rows[0] = {"radar", "-", 0, 0, 0, 0, 0};
  rows[1] = {"radar", "d2", 0, 0, 0, 0, 0};
  rows[2] = {"radar-ext", "-", 0, 0, 0, 0, 0};
  rows[3] = {"radar-ext", "d2", 0, 0, 0, 0, 0};
  for (const FrameErrors& e : errors) {
    if (!e.ok) continue;
    const IntrinsicErrorReport* reports[4] = {&e.raw, &e.raw_filtered,
                                              &e.extended, &e.extended_filtered};
    for (int r = 0; r < 4; ++r) {
      rows[r].delta1 += reports[r]->delta1;
      rows[r].rmse += reports[r]->rmse;
      rows[r].point_count += double(reports[r]->point_count);
      rows[r].retained_pct += 100.0 * reports[r]->retained_fraction;
      rows[r].frames += 1;
    }
  }
  for (Table1Row& row : rows) {
    if (row.frames == 0)
      throw EmptyMaskError("compute_table1: no usable frames");
    row.delta1 /= double(row.frames);
    row.rmse /= double(row.frames);
    row.point_count /= double(row.frames);
    row.retained_pct /= double(row.frames);
  }
  return rows;
}

}  // namespace rdp
