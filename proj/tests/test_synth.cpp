#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rdp/experiment.hpp"
#include "rdp/synth.hpp"

using namespace rdp;

namespace {

CameraIntrinsics test_intrinsics() {
  CameraIntrinsics i;
  i.fx = 100;
  i.fy = 100;
  i.cx = 50;
  i.cy = 50;
  i.width = 100;
  i.height = 100;
  return i;
}

// a wall wide/tall enough to cover the whole field of view at z = 10; the
// camera sits high enough that the ground is farther than the wall everywhere
Scene wall_scene() {
  Scene s;
  s.ground_height = 5.0;
  Box wall;
  wall.center = {0, 0, 10.5};
  wall.extent = {40, 40, 1.0};
  s.obstacles.push_back(wall);
  return s;
}

Scene empty_scene() {
  Scene s;
  s.ground_height = 1.0;
  return s;
}

}  // namespace

TEST_CASE("render_gt_depth") {
  const auto intr = test_intrinsics();

  SUBCASE("full wall gives constant z-depth") {
    const DepthMap m = render_gt_depth(wall_scene(), intr);
    for (int v = 0; v < intr.height; ++v)
      for (int u = 0; u < intr.width; ++u) {
        REQUIRE(m.valid_at(u, v));
        // z-depth of a fronto-parallel plane is constant across the image
        CHECK(m.at(u, v) == doctest::Approx(10.0).epsilon(1e-9));
      }
  }

  SUBCASE("ground plane follows the projective formula") {
    const DepthMap m = render_gt_depth(empty_scene(), intr);
    for (int v = 0; v < intr.height; ++v) {
      const double dy = (v - intr.cy) / intr.fy;
      if (dy <= 0.0) {
        // horizon and above: no hit
        CHECK_FALSE(m.valid_at(50, v));
      } else if (1.0 / dy > 80.0) {
        CHECK_FALSE(m.valid_at(50, v));  // beyond the far plane
      } else {
        // stored as float32, so compare at float precision
        CHECK(m.at(50, v) ==
              doctest::Approx(intr.fy * 1.0 / (v - intr.cy)).epsilon(1e-6));
      }
    }
  }

  SUBCASE("box occludes the ground behind it") {
    Scene s = empty_scene();
    Box b;
    b.center = {0, 0.5, 8.0};
    b.extent = {4, 1.0, 2.0};
    s.obstacles.push_back(b);
    const DepthMap with_box = render_gt_depth(s, intr);
    const DepthMap without = render_gt_depth(empty_scene(), intr);
    bool any_closer = false;
    for (std::size_t i = 0; i < with_box.pixel_count(); ++i)
      if (with_box.data[i] > 0.0f && without.data[i] > 0.0f &&
          with_box.data[i] < without.data[i])
        any_closer = true;
    CHECK(any_closer);
  }

  SUBCASE("invalid scene throws") {
    Scene s;
    Box b;
    b.center = {0, 0, 5};
    b.extent = {1, -1, 1};
    s.obstacles.push_back(b);
    CHECK_THROWS_AS(render_gt_depth(s, test_intrinsics()), std::invalid_argument);
    Scene s2;
    Box behind;
    behind.center = {0, 0, -5};
    behind.extent = {1, 1, 1};
    s2.obstacles.push_back(behind);
    CHECK_THROWS_AS(render_gt_depth(s2, test_intrinsics()),
                    std::invalid_argument);
  }
}

TEST_CASE("sample_lidar") {
  const auto intr = test_intrinsics();
  const DepthMap gt = render_gt_depth(wall_scene(), intr);  // fully valid

  SUBCASE("density 0.05 on 10000 pixels yields about 500 points") {
    const DepthMap l = sample_lidar(gt, 0.05, 7);
    const std::size_t n = count_points(l);
    CHECK(n > 450);
    CHECK(n < 550);
  }

  SUBCASE("density 1 copies every valid pixel") {
    const DepthMap l = sample_lidar(gt, 1.0, 3);
    CHECK(l.data == gt.data);
  }

  SUBCASE("sampled depths are copied exactly") {
    const DepthMap l = sample_lidar(gt, 0.1, 11);
    for (std::size_t i = 0; i < l.pixel_count(); ++i)
      if (l.data[i] > 0.0f) CHECK(l.data[i] == gt.data[i]);
  }

  SUBCASE("same seed reproduces, different seed differs") {
    const DepthMap a = sample_lidar(gt, 0.1, 21);
    const DepthMap b = sample_lidar(gt, 0.1, 21);
    const DepthMap c = sample_lidar(gt, 0.1, 22);
    CHECK(a.data == b.data);
    CHECK(a.data != c.data);
  }

  SUBCASE("rows are banded: occupied rows form a strided subset") {
    const DepthMap l = sample_lidar(gt, 0.05, 5);
    std::vector<int> rows;
    for (int y = 0; y < l.height; ++y)
      for (int x = 0; x < l.width; ++x)
        if (l.valid_at(x, y)) {
          rows.push_back(y);
          break;
        }
    REQUIRE(rows.size() > 1);
    const int stride = rows[1] - rows[0];
    CHECK(stride > 1);
    for (std::size_t i = 1; i < rows.size(); ++i)
      CHECK((rows[i] - rows[0]) % stride == 0);
  }

  SUBCASE("invalid density throws") {
    CHECK_THROWS_AS(sample_lidar(gt, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_lidar(gt, 1.5, 1), std::invalid_argument);
  }
}

TEST_CASE("sample_radar") {
  const auto intr = test_intrinsics();

  SUBCASE("noise-free returns lie exactly on the wall") {
    RadarModel model;
    model.plane_height = 0.5;
    model.depth_noise_sigma = 0.0;
    model.azimuth_step = 0.02;
    model.dropout_prob = 0.0;
    const RadarFrame f = sample_radar(wall_scene(), intr, model);
    // field of view is +-atan(0.5), one beam per 0.02 rad
    CHECK(f.points.size() == 46);
    for (const Vec3& p : f.points.points) {
      CHECK(p.y == doctest::Approx(4.5).epsilon(1e-12));  // ground 5.0 - 0.5
      CHECK(p.z == doctest::Approx(10.0).epsilon(1e-9));  // wall front face
    }
  }

  SUBCASE("empty scene returns nothing") {
    RadarModel model;
    const RadarFrame f = sample_radar(empty_scene(), intr, model);
    CHECK(f.points.size() == 0);
  }

  SUBCASE("range-noise RMSE matches sigma within 20 percent") {
    RadarModel model;
    model.depth_noise_sigma = 2.0;
    model.azimuth_step = 0.02;
    double sq = 0.0;
    std::size_t n = 0;
    for (int trial = 0; trial < 100; ++trial) {
      model.seed = 1000 + std::uint64_t(trial);
      const RadarFrame f = sample_radar(wall_scene(), intr, model);
      for (const Vec3& p : f.points.points) {
        const double a = std::atan2(p.x, p.z);
        const double range = p.z / std::cos(a);
        const double truth = 10.0 / std::cos(a);
        sq += (range - truth) * (range - truth);
        ++n;
      }
    }
    REQUIRE(n > 1000);
    const double rmse = std::sqrt(sq / double(n));
    CHECK(rmse > 1.6);
    CHECK(rmse < 2.4);
  }

  SUBCASE("dropout removes roughly the requested fraction") {
    RadarModel model;
    model.dropout_prob = 0.5;
    std::size_t kept = 0;
    const std::size_t beams = 46;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
      model.seed = std::uint64_t(t);
      kept += sample_radar(wall_scene(), intr, model).points.size();
    }
    const double frac = double(kept) / double(beams * trials);
    CHECK(frac > 0.4);
    CHECK(frac < 0.6);
  }

  SUBCASE("same seed reproduces the frame") {
    RadarModel model;
    model.depth_noise_sigma = 1.0;
    model.dropout_prob = 0.2;
    model.seed = 77;
    const RadarFrame a = sample_radar(wall_scene(), intr, model);
    const RadarFrame b = sample_radar(wall_scene(), intr, model);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i)
      CHECK((a.points.points[i] - b.points.points[i]).norm() == 0.0);
  }

  SUBCASE("invalid model throws") {
    RadarModel model;
    model.depth_noise_sigma = -1.0;
    CHECK_THROWS_AS(sample_radar(wall_scene(), intr, model),
                    std::invalid_argument);
    model = RadarModel{};
    model.dropout_prob = 2.0;
    CHECK_THROWS_AS(sample_radar(wall_scene(), intr, model),
                    std::invalid_argument);
  }
}

TEST_CASE("radar/gt geometric consistency") {
  // noise-free radar hits on a fronto-parallel wall project onto pixels whose
  // gt depth is the same wall depth
  const auto intr = test_intrinsics();
  const Scene scene = wall_scene();
  RadarModel model;
  model.depth_noise_sigma = 0.0;
  model.dropout_prob = 0.0;
  const RadarFrame f = sample_radar(scene, intr, model);
  REQUIRE(f.points.size() > 5);
  const DepthMap gt = render_gt_depth(scene, intr);
  const DepthMap sparse = render_sparse_depth(f.points, intr);
  std::size_t checked = 0;
  for (int y = 0; y < gt.height; ++y)
    for (int x = 0; x < gt.width; ++x)
      if (sparse.valid_at(x, y)) {
        REQUIRE(gt.valid_at(x, y));
        CHECK(sparse.at(x, y) == doctest::Approx(gt.at(x, y)).epsilon(1e-6));
        ++checked;
      }
  CHECK(checked > 5);
}

TEST_CASE("portable rng") {
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(std::abs(std::sqrt(sq / n) - 1.0) < 0.05);
}

TEST_CASE("dataset generation") {
  SynthConfig cfg;
  cfg.frame_count = 8;

  SUBCASE("frames are deterministic given the seed") {
    const SynthFrame a = generate_frame(cfg, 3);
    const SynthFrame b = generate_frame(cfg, 3);
    CHECK(a.gt.data == b.gt.data);
    CHECK(a.lidar.data == b.lidar.data);
    REQUIRE(a.radar.points.size() == b.radar.points.size());
    for (std::size_t i = 0; i < a.radar.points.size(); ++i)
      CHECK((a.radar.points.points[i] - b.radar.points.points[i]).norm() == 0.0);
  }

  SUBCASE("different frames see shifted scenes") {
    const SynthFrame f0 = generate_frame(cfg, 0);
    const SynthFrame f5 = generate_frame(cfg, 5);
    CHECK(f0.gt.data != f5.gt.data);
    CHECK(f5.radar.ego_to_global.translation.z ==
          doctest::Approx(5 * cfg.ego_step));
  }

  SUBCASE("obstacles behind the camera are culled") {
    const Scene late = scene_at_frame(cfg, 200);
    CHECK(late.obstacles.empty());
    CHECK_NOTHROW(late.validate());
  }

  SUBCASE("guidance is in [0,1] with sky brightest") {
    const SynthFrame f = generate_frame(cfg, 0);
    const GuidanceImage g = guidance_from_depth(f.gt, cfg.scene.far_plane);
    for (std::size_t i = 0; i < g.luminance.size(); ++i) {
      CHECK(g.luminance[i] >= 0.0f);
      CHECK(g.luminance[i] <= 1.0f);
      if (!(f.gt.data[i] > 0.0f)) CHECK(g.luminance[i] == 0.95f);
    }
  }
}

TEST_CASE("table pipeline on a short synthetic sequence") {
  SynthConfig cfg;
  cfg.frame_count = 12;
  std::vector<SynthFrame> frames;
  for (int i = 0; i < cfg.frame_count; ++i)
    frames.push_back(generate_frame(cfg, i));

  PipelineConfig pcfg;
  const auto rows = compute_table1(frames, cfg.intrinsics, pcfg,
                                   ReferenceKind::kGroundTruth,
                                   cfg.scene.far_plane);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].modality == "radar");
  CHECK(rows[1].threshold == "d2");
  CHECK(rows[2].modality == "radar-ext");
  // extension multiplies the point count; filtering cannot raise it
  CHECK(rows[2].point_count > rows[0].point_count);
  CHECK(rows[1].point_count <= rows[0].point_count);
  CHECK(rows[3].point_count <= rows[2].point_count);
  for (const Table1Row& r : rows) {
    CHECK(r.frames > 0);
    CHECK(r.delta1 >= 0.0);
    CHECK(r.delta1 <= 1.0);
    CHECK(r.rmse >= 0.0);
    CHECK(r.retained_pct <= 100.0 + 1e-9);
  }
}
