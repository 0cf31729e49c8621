#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rdp/io.hpp"

using namespace rdp;
namespace fs = std::filesystem;

namespace {

const std::string cli = RDP_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rdp_cli_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args, const std::string& stdout_path = "") {
  std::string cmd = cli + " " + args;
  if (!stdout_path.empty()) cmd += " > " + stdout_path;
  cmd += " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_simple_calib(const std::string& path) {
  std::ofstream f(path);
  f << "fx 100\nfy 100\ncx 50\ncy 50\nwidth 100\nheight 100\n";
}

}  // namespace

TEST_CASE("argument validation exits with code 2") {
  CHECK(run("") == 2);                       // missing subcommand
  CHECK(run("frobnicate") == 2);             // unknown subcommand
  CHECK(run("project --points a.csv") == 2); // missing required options
  CHECK(run("--version") == 0);
  CHECK(run("--help") == 0);
}

TEST_CASE("project renders the documented example pixel") {
  TempDir dir;
  write_simple_calib(dir.file("calib.txt"));
  {
    std::ofstream f(dir.file("points.csv"));
    f << "x,y,z\n1,0,10\n0,0,-4\n";  // second point is behind the camera
  }
  const std::string out = dir.file("sparse.pfm");
  CHECK(run("project --points " + dir.file("points.csv") + " --calib " +
            dir.file("calib.txt") + " --out " + out + " --png " +
            dir.file("sparse.png")) == 0);
  const DepthMap m = read_pfm(out);
  CHECK(m.width == 100);
  CHECK(m.height == 100);
  CHECK(m.at(60, 50) == 10.0f);
  std::size_t valid = 0;
  for (float v : m.data)
    if (v > 0.0f) ++valid;
  CHECK(valid == 1);
  CHECK(fs::exists(dir.file("sparse.png")));

  SUBCASE("manifest records the run") {
    const auto manifest =
        nlohmann::json::parse(slurp(dir.file("sparse.manifest.json")));
    CHECK(manifest["command"] == "project");
    CHECK(manifest.contains("version"));
    CHECK(manifest.contains("duration_seconds"));
    CHECK(manifest["outputs"].size() == 2);
  }
}

TEST_CASE("project with a missing input exits 2") {
  TempDir dir;
  write_simple_calib(dir.file("calib.txt"));
  CHECK(run("project --points " + dir.file("absent.csv") + " --calib " +
            dir.file("calib.txt") + " --out " + dir.file("out.pfm")) == 2);
}

TEST_CASE("project with a malformed csv exits 2") {
  TempDir dir;
  write_simple_calib(dir.file("calib.txt"));
  {
    std::ofstream f(dir.file("bad.csv"));
    f << "x,y,z\n1,zap,3\n";
  }
  CHECK(run("project --points " + dir.file("bad.csv") + " --calib " +
            dir.file("calib.txt") + " --out " + dir.file("out.pfm")) == 2);
}

TEST_CASE("pipeline") {
  TempDir dir;
  const fs::path frames = dir.path / "frames";
  fs::create_directories(frames);
  write_simple_calib(dir.file("calib.txt"));
  {
    // one frame; points at the nominal return height ground 1.0 - base 0.5
    std::ofstream f((frames / "points_0000.csv").string());
    f << "x,y,z\n0.4,0.5,10\n-1.1,0.5,5\n";
    std::ofstream p((frames / "poses.txt").string());
    p << "1 0 0 0 0 1 0 0 0 0 1 0\n";
  }

  SUBCASE("degenerate extension equals plain projection") {
    const std::string a = dir.file("plain.pfm");
    const std::string b = dir.file("degenerate.pfm");
    CHECK(run("pipeline --frames " + frames.string() + " --calib " +
              dir.file("calib.txt") + " --out " + a + " --no-extend") == 0);
    CHECK(run("pipeline --frames " + frames.string() + " --calib " +
              dir.file("calib.txt") + " --out " + b +
              " --h-min 0.5 --h-max 0.5 --base-height 0.5") == 0);
    CHECK(slurp(a) == slurp(b));
    const DepthMap m = read_pfm(a);
    CHECK(count_points(m) == 2);
  }

  SUBCASE("extension adds vertical coverage") {
    const std::string out = dir.file("ext.pfm");
    CHECK(run("pipeline --frames " + frames.string() + " --calib " +
              dir.file("calib.txt") + " --out " + out) == 0);
    const DepthMap ext = read_pfm(out);
    CHECK(count_points(ext) > 2);
  }

  SUBCASE("filtering against a reference and reporting") {
    DepthMap ref(100, 100);
    for (float& v : ref.data) v = 10.0f;
    write_pfm(dir.file("ref.pfm"), ref);
    const std::string out = dir.file("filtered.pfm");
    const std::string stdout_path = dir.file("stdout.txt");
    CHECK(run("pipeline --frames " + frames.string() + " --calib " +
                  dir.file("calib.txt") + " --out " + out +
                  " --no-extend --filter --reference " + dir.file("ref.pfm") +
                  " --report " + dir.file("report.csv"),
              stdout_path) == 0);
    // the z=5 return is a factor 2 off the reference: filtered out
    const DepthMap m = read_pfm(out);
    CHECK(count_points(m) == 1);
    CHECK(m.at(54, 55) == 10.0f);  // the z=10 return's pixel
    const std::string report = slurp(dir.file("report.csv"));
    CHECK(report.find("delta1,rmse,points,retained_pct") != std::string::npos);
    CHECK(report.find("1.000,0.000,1,50.000") != std::string::npos);
    CHECK(slurp(stdout_path).find("delta1 1.000") != std::string::npos);
  }

  SUBCASE("--filter without --reference exits 2") {
    CHECK(run("pipeline --frames " + frames.string() + " --calib " +
              dir.file("calib.txt") + " --out " + dir.file("x.pfm") +
              " --filter") == 2);
  }

  SUBCASE("inverted extension heights exit 2") {
    CHECK(run("pipeline --frames " + frames.string() + " --calib " +
              dir.file("calib.txt") + " --out " + dir.file("x.pfm") +
              " --h-min 2.0 --h-max 0.25") == 2);
  }

  SUBCASE("empty frames directory exits 2") {
    const fs::path empty = dir.path / "empty";
    fs::create_directories(empty);
    std::ofstream((empty / "poses.txt").string());
    CHECK(run("pipeline --frames " + empty.string() + " --calib " +
              dir.file("calib.txt") + " --out " + dir.file("x.pfm")) == 2);
  }
}

TEST_CASE("interpolate") {
  TempDir dir;
  DepthMap seeds(16, 12);
  seeds.at(2, 2) = 5.0f;
  seeds.at(13, 9) = 30.0f;
  GuidanceImage guide(16, 12);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 16; ++x) guide.at(x, y) = x < 8 ? 0.2f : 0.8f;
  write_pfm(dir.file("sparse.pfm"), seeds);
  write_pfm(dir.file("guide.pfm"), guide);

  SUBCASE("produces a fully dense map and reports convergence") {
    const std::string stdout_path = dir.file("stdout.txt");
    CHECK(run("interpolate --sparse " + dir.file("sparse.pfm") + " --guide " +
                  dir.file("guide.pfm") + " --out " + dir.file("dense.pfm"),
              stdout_path) == 0);
    const DepthMap dense = read_pfm(dir.file("dense.pfm"));
    CHECK(count_points(dense) == dense.pixel_count());
    CHECK(dense.at(2, 2) == 5.0f);
    CHECK(dense.at(13, 9) == 30.0f);
    CHECK(slurp(stdout_path).find("iterations") != std::string::npos);
  }

  SUBCASE("zero seeds exit 2") {
    write_pfm(dir.file("empty.pfm"), DepthMap(16, 12));
    CHECK(run("interpolate --sparse " + dir.file("empty.pfm") + " --guide " +
              dir.file("guide.pfm") + " --out " + dir.file("dense.pfm")) == 2);
  }

  SUBCASE("unreachable tolerance exits 3") {
    CHECK(run("interpolate --sparse " + dir.file("sparse.pfm") + " --guide " +
              dir.file("guide.pfm") + " --out " + dir.file("dense.pfm") +
              " --tolerance 1e-14 --max-iterations 1") == 3);
  }

  SUBCASE("size mismatch exits 2") {
    write_pfm(dir.file("small.pfm"), DepthMap(4, 4));
    CHECK(run("interpolate --sparse " + dir.file("small.pfm") + " --guide " +
              dir.file("guide.pfm") + " --out " + dir.file("dense.pfm")) == 2);
  }
}

TEST_CASE("evaluate") {
  TempDir dir;
  DepthMap gt(2, 1), pred(2, 1);
  gt.data = {2.0f, 2.0f};
  pred.data = {2.0f, 4.0f};
  write_pfm(dir.file("gt.pfm"), gt);
  write_pfm(dir.file("pred.pfm"), pred);

  SUBCASE("prints the three headline metrics") {
    const std::string stdout_path = dir.file("stdout.txt");
    CHECK(run("evaluate --pred " + dir.file("pred.pfm") + " --gt " +
                  dir.file("gt.pfm") + " --out " + dir.file("metrics.csv"),
              stdout_path) == 0);
    const std::string out = slurp(stdout_path);
    CHECK(out.find("0.500  1.414  0.500") != std::string::npos);
    const std::string csv = slurp(dir.file("metrics.csv"));
    CHECK(csv.find("method,delta1,rmse,absrel") != std::string::npos);
    CHECK(csv.find("pred,0.500,1.414,0.500") != std::string::npos);
  }

  SUBCASE("range mask can empty the evaluation: exit 3") {
    CHECK(run("evaluate --pred " + dir.file("pred.pfm") + " --gt " +
              dir.file("gt.pfm") + " --min 50 --max 80") == 3);
  }

  SUBCASE("missing file exits 2") {
    CHECK(run("evaluate --pred " + dir.file("none.pfm") + " --gt " +
              dir.file("gt.pfm")) == 2);
  }
}

TEST_CASE("synth datasets") {
  TempDir dir;
  const std::string a = (dir.path / "a").string();
  const std::string common = "synth --frames 6 --seed 9 --out ";
  CHECK(run(common + a) == 0);

  SUBCASE("expected files exist and parse") {
    CHECK(fs::exists(fs::path(a) / "calib.txt"));
    CHECK(fs::exists(fs::path(a) / "scene.txt"));
    CHECK(fs::exists(fs::path(a) / "poses.txt"));
    CHECK(fs::exists(fs::path(a) / "manifest.json"));
    for (int i = 0; i < 6; ++i) {
      const std::string tag = (i < 10 ? "000" : "00") + std::to_string(i);
      CHECK(fs::exists(fs::path(a) / ("points_" + tag + ".csv")));
      CHECK(fs::exists(fs::path(a) / ("gt_" + tag + ".pfm")));
      CHECK(fs::exists(fs::path(a) / ("lidar_" + tag + ".pfm")));
    }
    CHECK_FALSE(fs::exists(fs::path(a) / "points_0006.csv"));
    CHECK(read_poses((fs::path(a) / "poses.txt").string()).size() == 6);
    const DepthMap gt = read_pfm((fs::path(a) / "gt_0000.pfm").string());
    CHECK(gt.width == 160);
    CHECK(gt.height == 120);
    CHECK(count_points(gt) > 0);
  }

  SUBCASE("same seed is byte-identical, different seed is not") {
    const std::string b = (dir.path / "b").string();
    const std::string c = (dir.path / "c").string();
    CHECK(run(common + b) == 0);
    CHECK(run("synth --frames 6 --seed 10 --out " + c) == 0);
    bool any_diff_c = false;
    for (const auto& entry : fs::directory_iterator(a)) {
      const std::string name = entry.path().filename().string();
      if (name == "manifest.json") continue;  // carries wall-clock duration
      CHECK(slurp((fs::path(b) / name).string()) == slurp(entry.path().string()));
      if (slurp((fs::path(c) / name).string()) != slurp(entry.path().string()))
        any_diff_c = true;
    }
    CHECK(any_diff_c);
  }

  SUBCASE("table1 runs over the dataset") {
    const std::string stdout_path = dir.file("stdout.txt");
    CHECK(run("table1 --data " + a + " --window 5 --out " +
                  dir.file("table1.csv"),
              stdout_path) == 0);
    const std::string out = slurp(stdout_path);
    CHECK(out.find("radar") != std::string::npos);
    CHECK(out.find("radar-ext") != std::string::npos);
    std::istringstream csv(slurp(dir.file("table1.csv")));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(csv, line))
      if (!line.empty()) lines.push_back(line);
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "modality,threshold,delta1,rmse,points,retained_pct");
    CHECK(lines[1].rfind("radar,-,", 0) == 0);
    CHECK(lines[2].rfind("radar,d2,", 0) == 0);
    CHECK(lines[3].rfind("radar-ext,-,", 0) == 0);
    CHECK(lines[4].rfind("radar-ext,d2,", 0) == 0);
  }

  SUBCASE("zero frames still writes an empty dataset and manifest") {
    const std::string e = (dir.path / "e").string();
    CHECK(run("synth --frames 0 --out " + e) == 0);
    CHECK(fs::exists(fs::path(e) / "calib.txt"));
    CHECK(fs::exists(fs::path(e) / "manifest.json"));
    CHECK_FALSE(fs::exists(fs::path(e) / "points_0000.csv"));
  }

  SUBCASE("bad scene file exits 2") {
    std::ofstream f(dir.file("scene.txt"));
    f << "ground 1.0\nwidget 1 2 3\n";
    f.close();
    CHECK(run("synth --scene " + dir.file("scene.txt") + " --out " +
              (dir.path / "d").string()) == 2);
  }
}
