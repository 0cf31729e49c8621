// rdp: radar depth preprocessing, interpolation and evaluation toolbox.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rdp/depth_interp.hpp"
#include "rdp/experiment.hpp"
#include "rdp/io.hpp"
#include "rdp/metrics.hpp"
#include "rdp/png16.hpp"
#include "rdp/radar_pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 2 input/validation error, 3 numerical failure.
constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

class ManifestWriter {
 public:
  ManifestWriter(std::string command, fs::path path)
      : command_(std::move(command)),
        path_(std::move(path)),
        start_(std::chrono::steady_clock::now()) {}

  json& config() { return config_; }
  void add_input(const std::string& p) { inputs_.push_back(p); }
  void add_output(const std::string& p) { outputs_.push_back(p); }

  void write() const {
    json m;
    m["command"] = command_;
    m["version"] = kVersion;
    m["config"] = config_;
    m["inputs"] = inputs_;
    m["outputs"] = outputs_;
    m["duration_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    std::ofstream f(path_);
    if (!f) throw std::invalid_argument("cannot write manifest " + path_.string());
    f << m.dump(2) << "\n";
  }

 private:
  std::string command_;
  fs::path path_;
  std::chrono::steady_clock::time_point start_;
  json config_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

std::string fmt3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string scene_path;  // empty = built-in street scene
  std::string out_dir;
  int frames = 50;
  std::uint64_t seed = 1;
  double ego_step = 0.5;
  double lidar_density = 0.15;
  rdp::RadarModel radar = rdp::default_radar_model();
  rdp::CameraIntrinsics intr = rdp::default_intrinsics();
};

std::string frame_name(const char* stem, int i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d.%s", stem, i, ext);
  return buf;
}

int run_synth(const SynthArgs& args) {
  rdp::SynthConfig cfg;
  if (!args.scene_path.empty()) cfg.scene = rdp::read_scene(args.scene_path);
  cfg.intrinsics = args.intr;
  cfg.intrinsics.validate();
  cfg.radar = args.radar;
  cfg.radar.validate();
  cfg.lidar_density = args.lidar_density;
  cfg.ego_step = args.ego_step;
  cfg.seed = args.seed;
  cfg.frame_count = args.frames;

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  ManifestWriter manifest("synth", out / "manifest.json");
  manifest.config() = {{"scene", args.scene_path.empty() ? "<builtin-street>"
                                                         : args.scene_path},
                       {"frames", args.frames},
                       {"seed", args.seed},
                       {"ego_step", args.ego_step},
                       {"lidar_density", args.lidar_density},
                       {"radar_sigma", cfg.radar.depth_noise_sigma},
                       {"radar_azimuth_step", cfg.radar.azimuth_step},
                       {"radar_dropout", cfg.radar.dropout_prob},
                       {"radar_plane_height", cfg.radar.plane_height}};
  if (!args.scene_path.empty()) manifest.add_input(args.scene_path);

  rdp::Calibration calib;
  calib.intrinsics = cfg.intrinsics;
  rdp::write_calibration((out / "calib.txt").string(), calib);
  rdp::write_scene((out / "scene.txt").string(), cfg.scene);
  manifest.add_output((out / "calib.txt").string());
  manifest.add_output((out / "scene.txt").string());

  std::vector<rdp::SynthFrame> frames(std::size_t(cfg.frame_count));
  rdp::parallel_for(frames.size(),
                    [&](std::size_t i) { frames[i] = rdp::generate_frame(cfg, int(i)); });

  std::vector<rdp::RigidTransform> poses;
  for (int i = 0; i < cfg.frame_count; ++i) {
    const rdp::SynthFrame& f = frames[std::size_t(i)];
    poses.push_back(f.radar.ego_to_global);
    const std::string pts = frame_name("points", i, "csv");
    const std::string gt = frame_name("gt", i, "pfm");
    const std::string lidar = frame_name("lidar", i, "pfm");
    rdp::write_pointcloud_csv((out / pts).string(), f.radar.points);
    rdp::write_pfm((out / gt).string(), f.gt);
    rdp::write_pfm((out / lidar).string(), f.lidar);
    manifest.add_output((out / pts).string());
    manifest.add_output((out / gt).string());
    manifest.add_output((out / lidar).string());
  }
  rdp::write_poses((out / "poses.txt").string(), poses);
  manifest.add_output((out / "poses.txt").string());
  manifest.write();
  std::cout << "wrote " << cfg.frame_count << " frames to " << args.out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// project
// ---------------------------------------------------------------------------

int run_project(const std::string& points_path, const std::string& calib_path,
                const std::string& out_path, const std::string& png_path) {
  ManifestWriter manifest("project", fs::path(out_path).parent_path() /
                                         (fs::path(out_path).stem().string() +
                                          ".manifest.json"));
  manifest.config() = {{"points", points_path}, {"calib", calib_path}};
  manifest.add_input(points_path);
  manifest.add_input(calib_path);

  const rdp::PointCloud cloud = rdp::read_pointcloud_csv(points_path);
  const rdp::Calibration calib = rdp::read_calibration(calib_path);
  const rdp::DepthMap map = rdp::render_sparse_depth(cloud, calib.intrinsics);
  rdp::write_pfm(out_path, map);
  manifest.add_output(out_path);
  if (!png_path.empty()) {
    rdp::write_depth_png16(png_path, map);
    manifest.add_output(png_path);
  }
  manifest.write();
  std::cout << "projected " << cloud.size() << " points, "
            << rdp::count_points(map) << " pixels -> " << out_path << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

struct DatasetFrames {
  std::vector<rdp::RadarFrame> frames;
};

DatasetFrames load_radar_frames(const std::string& dir) {
  DatasetFrames ds;
  const std::vector<rdp::RigidTransform> poses =
      rdp::read_poses((fs::path(dir) / "poses.txt").string());
  for (std::size_t i = 0;; ++i) {
    const fs::path p = fs::path(dir) / frame_name("points", int(i), "csv");
    if (!fs::exists(p)) break;
    rdp::RadarFrame f;
    f.points = rdp::read_pointcloud_csv(p.string());
    f.timestamp = 0.1 * double(i);
    if (i < poses.size()) f.ego_to_global = poses[i];
    ds.frames.push_back(std::move(f));
  }
  if (ds.frames.empty())
    throw std::invalid_argument("no points_*.csv frames found in " + dir);
  if (ds.frames.size() > poses.size())
    throw std::invalid_argument("poses.txt has fewer rows than frames in " + dir);
  return ds;
}

struct PipelineArgs {
  std::string frames_dir, calib_path, out_path;
  std::string reference_path;  // optional
  std::string report_path;     // optional
  int window = 5;
  bool extend = true;
  bool filter = false;
  double ground_y = 1.0;
  rdp::HeightExtensionConfig extension;
  rdp::FilterConfig filter_cfg;
};

int run_pipeline(const PipelineArgs& args) {
  if (args.filter && args.reference_path.empty())
    throw std::invalid_argument("--filter requires --reference");
  args.extension.validate();
  args.filter_cfg.validate();

  ManifestWriter manifest("pipeline", fs::path(args.out_path).parent_path() /
                                          (fs::path(args.out_path).stem().string() +
                                           ".manifest.json"));
  manifest.config() = {{"frames", args.frames_dir},   {"calib", args.calib_path},
                       {"window", args.window},       {"extend", args.extend},
                       {"filter", args.filter},       {"ground", args.ground_y},
                       {"h_min", args.extension.h_min},
                       {"h_max", args.extension.h_max},
                       {"ratio_threshold", args.filter_cfg.ratio_threshold}};
  manifest.add_input(args.frames_dir);
  manifest.add_input(args.calib_path);

  const DatasetFrames ds = load_radar_frames(args.frames_dir);
  const rdp::Calibration calib = rdp::read_calibration(args.calib_path);
  const rdp::RigidTransform camera_from_ego =
      calib.has_extrinsic ? calib.camera_from_ego : rdp::RigidTransform::identity();

  const std::size_t target = ds.frames.size() - 1;
  const std::size_t begin =
      target + 1 >= std::size_t(args.window) ? target + 1 - std::size_t(args.window) : 0;
  const std::vector<rdp::RadarFrame> window(ds.frames.begin() + long(begin),
                                            ds.frames.end());
  const rdp::PointCloud cloud =
      rdp::accumulate_frames(window, window.size() - 1, camera_from_ego);

  rdp::DepthMap map =
      args.extend
          ? rdp::extend_height(cloud, calib.intrinsics, args.extension, args.ground_y)
          : rdp::render_sparse_depth(cloud, calib.intrinsics);
  const std::size_t unfiltered_count = rdp::count_points(map);

  std::optional<rdp::DepthMap> reference;
  if (!args.reference_path.empty()) {
    reference = rdp::read_pfm(args.reference_path);
    manifest.add_input(args.reference_path);
  }
  if (args.filter) map = rdp::filter_by_ratio(map, *reference, args.filter_cfg);

  rdp::write_pfm(args.out_path, map);
  manifest.add_output(args.out_path);

  if (reference) {
    const rdp::IntrinsicErrorReport rep =
        rdp::intrinsic_error(map, *reference, unfiltered_count);
    std::cout << "delta1 " << fmt3(rep.delta1) << "  rmse " << fmt3(rep.rmse)
              << "  points " << rep.point_count << " ("
              << fmt3(100.0 * rep.retained_fraction) << "%)\n";
    if (!args.report_path.empty()) {
      std::ofstream f(args.report_path);
      f << "delta1,rmse,points,retained_pct\n";
      f << fmt3(rep.delta1) << "," << fmt3(rep.rmse) << "," << rep.point_count
        << "," << fmt3(100.0 * rep.retained_fraction) << "\n";
      manifest.add_output(args.report_path);
    }
  } else {
    std::cout << "points " << rdp::count_points(map) << " -> " << args.out_path
              << "\n";
  }
  manifest.write();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// interpolate
// ---------------------------------------------------------------------------

int run_interpolate(const std::string& sparse_path, const std::string& guide_path,
                    const std::string& out_path, rdp::InterpolationConfig cfg) {
  ManifestWriter manifest("interpolate",
                          fs::path(out_path).parent_path() /
                              (fs::path(out_path).stem().string() + ".manifest.json"));
  manifest.config() = {{"sparse", sparse_path},
                       {"guide", guide_path},
                       {"neighborhood", cfg.neighborhood},
                       {"tolerance", cfg.solver_tolerance}};
  manifest.add_input(sparse_path);
  manifest.add_input(guide_path);

  const rdp::DepthMap seeds = rdp::read_pfm(sparse_path);
  const rdp::GuidanceImage guide = rdp::read_guidance_pfm(guide_path);
  rdp::SolveStats stats;
  const rdp::DepthMap dense = rdp::interpolate_dense(seeds, guide, cfg, &stats);
  rdp::write_pfm(out_path, dense);
  manifest.add_output(out_path);
  manifest.write();
  std::cout << "solved in " << stats.iterations << " iterations, residual "
            << stats.residual << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

int run_evaluate(const std::string& pred_path, const std::string& gt_path,
                 double range_min, double range_max, const std::string& csv_path) {
  const rdp::DepthMap pred = rdp::read_pfm(pred_path);
  const rdp::DepthMap gt = rdp::read_pfm(gt_path);
  const rdp::EvalReport rep = rdp::evaluate(pred, gt, range_min, range_max);
  std::cout << "delta1  rmse   absrel\n";
  std::cout << fmt3(rep.delta1) << "  " << fmt3(rep.rmse) << "  "
            << fmt3(rep.abs_rel) << "\n";
  if (!csv_path.empty()) {
    ManifestWriter manifest("evaluate",
                            fs::path(csv_path).parent_path() /
                                (fs::path(csv_path).stem().string() + ".manifest.json"));
    manifest.config() = {{"pred", pred_path},
                         {"gt", gt_path},
                         {"range_min", range_min},
                         {"range_max", range_max}};
    manifest.add_input(pred_path);
    manifest.add_input(gt_path);
    std::ofstream f(csv_path);
    f << "method,delta1,rmse,absrel\n";
    f << fs::path(pred_path).stem().string() << "," << fmt3(rep.delta1) << ","
      << fmt3(rep.rmse) << "," << fmt3(rep.abs_rel) << "\n";
    manifest.add_output(csv_path);
    manifest.write();
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// table1
// ---------------------------------------------------------------------------

int run_table1(const std::string& data_dir, int window, const std::string& reference,
               const std::string& csv_path) {
  ManifestWriter manifest("table1", fs::path(data_dir) / "table1.manifest.json");
  manifest.config() = {{"data", data_dir}, {"window", window}, {"reference", reference}};
  manifest.add_input(data_dir);

  const rdp::Calibration calib =
      rdp::read_calibration((fs::path(data_dir) / "calib.txt").string());
  const rdp::Scene scene = rdp::read_scene((fs::path(data_dir) / "scene.txt").string());
  const DatasetFrames ds = load_radar_frames(data_dir);

  std::vector<rdp::SynthFrame> frames;
  for (std::size_t i = 0; i < ds.frames.size(); ++i) {
    rdp::SynthFrame f;
    f.radar = ds.frames[i];
    f.gt = rdp::read_pfm((fs::path(data_dir) / frame_name("gt", int(i), "pfm")).string());
    f.lidar = rdp::read_pfm(
        (fs::path(data_dir) / frame_name("lidar", int(i), "pfm")).string());
    frames.push_back(std::move(f));
  }

  rdp::PipelineConfig cfg;
  cfg.window = window;
  cfg.ground_y = scene.ground_height;
  const rdp::ReferenceKind kind = reference == "interp"
                                      ? rdp::ReferenceKind::kInterpolated
                                      : rdp::ReferenceKind::kGroundTruth;
  const std::vector<rdp::Table1Row> rows = rdp::compute_table1(
      frames, calib.intrinsics, cfg, kind, scene.far_plane);

  std::printf("%-10s %-9s %8s %8s %18s\n", "modality", "threshold", "delta1",
              "RMSE", "#points (%)");
  for (const rdp::Table1Row& r : rows)
    std::printf("%-10s %-9s %8s %8s %10.1f (%.1f)\n", r.modality.c_str(),
                r.threshold.c_str(), fmt3(r.delta1).c_str(), fmt3(r.rmse).c_str(),
                r.point_count, r.retained_pct);

  if (!csv_path.empty()) {
    std::ofstream f(csv_path);
    f << "modality,threshold,delta1,rmse,points,retained_pct\n";
    for (const rdp::Table1Row& r : rows)
      f << r.modality << "," << r.threshold << "," << fmt3(r.delta1) << ","
        << fmt3(r.rmse) << "," << fmt3(r.point_count) << ","
        << fmt3(r.retained_pct) << "\n";
    manifest.add_output(csv_path);
  }
  manifest.write();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radar depth preprocessing and evaluation toolbox"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // synth
  SynthArgs synth;
  CLI::App* cmd_synth = app.add_subcommand("synth", "generate a synthetic dataset");
  cmd_synth->set_config("--config");
  cmd_synth->add_option("--scene", synth.scene_path, "scene file (default: built-in street scene)");
  cmd_synth->add_option("--out", synth.out_dir, "output directory")->required();
  cmd_synth->add_option("--frames", synth.frames, "frame count")->check(CLI::NonNegativeNumber);
  cmd_synth->add_option("--seed", synth.seed, "random seed");
  cmd_synth->add_option("--ego-step", synth.ego_step, "forward motion per frame [m]");
  cmd_synth->add_option("--lidar-density", synth.lidar_density, "lidar sample density (0,1]");
  cmd_synth->add_option("--radar-sigma", synth.radar.depth_noise_sigma, "radar range noise sigma [m]");
  cmd_synth->add_option("--radar-azimuth-step", synth.radar.azimuth_step, "radar beam spacing [rad]");
  cmd_synth->add_option("--radar-dropout", synth.radar.dropout_prob, "radar dropout probability");
  cmd_synth->add_option("--radar-plane-height", synth.radar.plane_height, "radar plane height above ground [m]");
  cmd_synth->add_option("--fx", synth.intr.fx);
  cmd_synth->add_option("--fy", synth.intr.fy);
  cmd_synth->add_option("--cx", synth.intr.cx);
  cmd_synth->add_option("--cy", synth.intr.cy);
  cmd_synth->add_option("--width", synth.intr.width);
  cmd_synth->add_option("--height", synth.intr.height);

  // project
  std::string prj_points, prj_calib, prj_out, prj_png;
  CLI::App* cmd_project = app.add_subcommand("project", "project a point cloud to a sparse depth map");
  cmd_project->set_config("--config");
  cmd_project->add_option("--points", prj_points, "point cloud CSV")->required();
  cmd_project->add_option("--calib", prj_calib, "calibration file")->required();
  cmd_project->add_option("--out", prj_out, "output PFM")->required();
  cmd_project->add_option("--png", prj_png, "optional 16-bit PNG export");

  // pipeline
  PipelineArgs pipe;
  CLI::App* cmd_pipeline = app.add_subcommand("pipeline", "accumulate, height-extend and filter radar frames");
  cmd_pipeline->set_config("--config");
  cmd_pipeline->add_option("--frames", pipe.frames_dir, "frames directory")->required();
  cmd_pipeline->add_option("--calib", pipe.calib_path, "calibration file")->required();
  cmd_pipeline->add_option("--out", pipe.out_path, "output PFM")->required();
  cmd_pipeline->add_option("--window", pipe.window, "frames to accumulate")->check(CLI::PositiveNumber);
  cmd_pipeline->add_flag("--extend,!--no-extend", pipe.extend, "height extension (default on)");
  cmd_pipeline->add_flag("--filter", pipe.filter, "ratio-filter against the reference");
  cmd_pipeline->add_option("--reference", pipe.reference_path, "reference depth PFM");
  cmd_pipeline->add_option("--report", pipe.report_path, "intrinsic error report CSV");
  cmd_pipeline->add_option("--ground", pipe.ground_y, "camera-frame y of the ground plane [m]");
  cmd_pipeline->add_option("--h-min", pipe.extension.h_min, "extension lower height [m]");
  cmd_pipeline->add_option("--h-max", pipe.extension.h_max, "extension upper height [m]");
  cmd_pipeline->add_option("--base-height", pipe.extension.base_height, "nominal radar return height [m]");
  cmd_pipeline->add_option("--ratio-threshold", pipe.filter_cfg.ratio_threshold, "filter ratio threshold");

  // interpolate
  std::string itp_sparse, itp_guide, itp_out;
  rdp::InterpolationConfig itp_cfg;
  CLI::App* cmd_interpolate = app.add_subcommand("interpolate", "densify sparse depth via guided interpolation");
  cmd_interpolate->set_config("--config");
  cmd_interpolate->add_option("--sparse", itp_sparse, "sparse depth PFM")->required();
  cmd_interpolate->add_option("--guide", itp_guide, "guidance luminance PFM")->required();
  cmd_interpolate->add_option("--out", itp_out, "output dense PFM")->required();
  cmd_interpolate->add_option("--neighborhood", itp_cfg.neighborhood, "4 or 8");
  cmd_interpolate->add_option("--tolerance", itp_cfg.solver_tolerance, "relative residual tolerance");
  cmd_interpolate->add_option("--max-iterations", itp_cfg.max_iterations, "iteration cap (0 = auto)");

  // evaluate
  std::string ev_pred, ev_gt, ev_csv;
  double ev_min = 1.0, ev_max = 80.0;
  CLI::App* cmd_evaluate = app.add_subcommand("evaluate", "masked depth metrics between two maps");
  cmd_evaluate->set_config("--config");
  cmd_evaluate->add_option("--pred", ev_pred, "prediction PFM")->required();
  cmd_evaluate->add_option("--gt", ev_gt, "ground truth PFM")->required();
  cmd_evaluate->add_option("--min", ev_min, "lower depth bound [m]");
  cmd_evaluate->add_option("--max", ev_max, "upper depth bound [m]");
  cmd_evaluate->add_option("--out", ev_csv, "machine-readable CSV");

  // table1
  std::string t1_data, t1_csv, t1_ref = "gt";
  int t1_window = 5;
  CLI::App* cmd_table1 = app.add_subcommand("table1", "intrinsic radar error table over a synthetic dataset");
  cmd_table1->set_config("--config");
  cmd_table1->add_option("--data", t1_data, "dataset directory from `rdp synth`")->required();
  cmd_table1->add_option("--window", t1_window, "frames to accumulate")->check(CLI::PositiveNumber);
  cmd_table1->add_option("--reference", t1_ref, "reference depth: gt or interp")
      ->check(CLI::IsMember({"gt", "interp"}));
  cmd_table1->add_option("--out", t1_csv, "report CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*cmd_synth) return run_synth(synth);
    if (*cmd_project) return run_project(prj_points, prj_calib, prj_out, prj_png);
    if (*cmd_pipeline) return run_pipeline(pipe);
    if (*cmd_interpolate) return run_interpolate(itp_sparse, itp_guide, itp_out, itp_cfg);
    if (*cmd_evaluate) return run_evaluate(ev_pred, ev_gt, ev_min, ev_max, ev_csv);
    if (*cmd_table1) return run_table1(t1_data, t1_window, t1_ref, t1_csv);
  } catch (const rdp::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const rdp::EmptyMaskError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
