#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rdp/depth_interp.hpp"
#include "rdp/errors.hpp"
#include "rdp/geometry.hpp"
#include "rdp/synth.hpp"

namespace rdp {

// ---------------------------------------------------------------------------
// PFM depth maps ("Pf" grayscale, negative scale = little-endian, rows stored
// bottom-to-top). Lossless for the float32 payload.
// ---------------------------------------------------------------------------

inline void write_pfm(const std::string& path, const DepthMap& map) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("write_pfm: cannot open " + path);
  f << "Pf\n" << map.width << " " << map.height << "\n-1.0\n";
  for (int y = map.height - 1; y >= 0; --y)
    f.write(reinterpret_cast<const char*>(&map.data[std::size_t(y) * map.width]),
            std::streamsize(map.width) * 4);
  if (!f) throw std::runtime_error("write_pfm: write failed for " + path);
}

inline DepthMap read_pfm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("read_pfm: cannot open " + path);
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  f >> magic >> w >> h >> scale;
  if (magic != "Pf") throw ParseError(path, 1, "not a grayscale PFM (expected Pf)");
  if (w <= 0 || h <= 0) throw ParseError(path, 2, "bad dimensions");
  if (scale == 0.0) throw ParseError(path, 3, "bad scale");
  f.get();  // single whitespace after the scale line
  DepthMap map(w, h);
  for (int y = h - 1; y >= 0; --y)
    f.read(reinterpret_cast<char*>(&map.data[std::size_t(y) * w]),
           std::streamsize(w) * 4);
  if (!f) throw ParseError(path, 3, "truncated pixel data");
  if (scale > 0.0) {  // big-endian payload
    for (float& v : map.data) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      bits = (bits >> 24) | ((bits >> 8) & 0xff00u) | ((bits << 8) & 0xff0000u) |
             (bits << 24);
      std::memcpy(&v, &bits, 4);
    }
  }
  return map;
}

// Guidance shares the raster layout; reuse the PFM path.
inline void write_pfm(const std::string& path, const GuidanceImage& img) {
  DepthMap m;
  m.width = img.width;
  m.height = img.height;
  m.data = img.luminance;
  write_pfm(path, m);
}

inline GuidanceImage read_guidance_pfm(const std::string& path) {
  DepthMap m = read_pfm(path);
  GuidanceImage g;
  g.width = m.width;
  g.height = m.height;
  g.luminance = std::move(m.data);
  return g;
}

// ---------------------------------------------------------------------------
// Point clouds: header-lined CSV `x,y,z[,rcs,vx,vy]`
// ---------------------------------------------------------------------------

inline void write_pointcloud_csv(const std::string& path, const PointCloud& cloud) {
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("write_pointcloud_csv: cannot open " + path);
  f.precision(17);
  f << (cloud.has_attributes() ? "x,y,z,rcs,vx,vy\n" : "x,y,z\n");
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    f << p.x << "," << p.y << "," << p.z;
    if (cloud.has_attributes()) {
      const auto& a = cloud.attributes[i];
      f << "," << a[0] << "," << a[1] << "," << a[2];
    }
    f << "\n";
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline PointCloud read_pointcloud_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("read_pointcloud_csv: cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw ParseError(path, 1, "missing header");
  const auto header = split_csv_line(line);
  bool with_attrs;
  if (header.size() >= 3 && header[0] == "x" && header[1] == "y" &&
      header[2] == "z") {
    with_attrs = header.size() == 6;
    if (header.size() != 3 && header.size() != 6)
      throw ParseError(path, 1, "expected header x,y,z or x,y,z,rcs,vx,vy");
  } else {
    throw ParseError(path, 1, "expected header x,y,z or x,y,z,rcs,vx,vy");
  }
  PointCloud cloud;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != (with_attrs ? 6u : 3u))
      throw ParseError(path, lineno, "wrong column count");
    double vals[6] = {0, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < cells.size(); ++i) {
      try {
        std::size_t pos = 0;
        vals[i] = std::stod(cells[i], &pos);
        if (pos != cells[i].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError(path, lineno, "bad number '" + cells[i] + "'");
      }
    }
    cloud.points.push_back({vals[0], vals[1], vals[2]});
    if (with_attrs) cloud.attributes.push_back({vals[3], vals[4], vals[5]});
  }
  return cloud;
}

// ---------------------------------------------------------------------------
// Calibration: line-oriented key-value text
// ---------------------------------------------------------------------------

struct Calibration {
  CameraIntrinsics intrinsics;
  bool has_extrinsic = false;
  RigidTransform camera_from_ego;  // row-major 3x4 on the `extrinsic` line
};

inline void write_calibration(const std::string& path, const Calibration& calib) {
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("write_calibration: cannot open " + path);
  f.precision(17);
  f << "fx " << calib.intrinsics.fx << "\n";
  f << "fy " << calib.intrinsics.fy << "\n";
  f << "cx " << calib.intrinsics.cx << "\n";
  f << "cy " << calib.intrinsics.cy << "\n";
  f << "width " << calib.intrinsics.width << "\n";
  f << "height " << calib.intrinsics.height << "\n";
  if (calib.has_extrinsic) {
    f << "extrinsic";
    const RigidTransform& t = calib.camera_from_ego;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) f << " " << t.rotation(r, c);
      f << " " << (r == 0 ? t.translation.x : r == 1 ? t.translation.y : t.translation.z);
    }
    f << "\n";
  }
}

inline Calibration read_calibration(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("read_calibration: cannot open " + path);
  Calibration calib;
  bool seen[6] = {false, false, false, false, false, false};
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key) || key[0] == '#') continue;
    auto num = [&](double& dst) {
      if (!(ss >> dst)) throw ParseError(path, lineno, "bad value for key '" + key + "'");
    };
    if (key == "fx") { num(calib.intrinsics.fx); seen[0] = true; }
    else if (key == "fy") { num(calib.intrinsics.fy); seen[1] = true; }
    else if (key == "cx") { num(calib.intrinsics.cx); seen[2] = true; }
    else if (key == "cy") { num(calib.intrinsics.cy); seen[3] = true; }
    else if (key == "width") { double v; num(v); calib.intrinsics.width = int(v); seen[4] = true; }
    else if (key == "height") { double v; num(v); calib.intrinsics.height = int(v); seen[5] = true; }
    else if (key == "extrinsic") {
      double m[12];
      for (double& v : m) num(v);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) calib.camera_from_ego.rotation(r, c) = m[4 * r + c];
      calib.camera_from_ego.translation = {m[3], m[7], m[11]};
      calib.has_extrinsic = true;
    } else {
      throw ParseError(path, lineno, "unknown key '" + key + "'");
    }
  }
  static const char* names[6] = {"fx", "fy", "cx", "cy", "width", "height"};
  for (int i = 0; i < 6; ++i)
    if (!seen[i])
      throw ParseError(path, lineno, std::string("missing key '") + names[i] + "'");
  calib.intrinsics.validate();
  return calib;
}

// ---------------------------------------------------------------------------
// Poses: one line per frame, 12 row-major numbers (ego-to-global 3x4)
// ---------------------------------------------------------------------------

inline void write_poses(const std::string& path,
                        const std::vector<RigidTransform>& poses) {
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("write_poses: cannot open " + path);
  f.precision(17);
  for (const RigidTransform& t : poses) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) f << t.rotation(r, c) << " ";
      f << (r == 0 ? t.translation.x : r == 1 ? t.translation.y : t.translation.z);
      f << (r == 2 ? "" : " ");
    }
    f << "\n";
  }
}

inline std::vector<RigidTransform> read_poses(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("read_poses: cannot open " + path);
  std::vector<RigidTransform> poses;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double m[12];
    for (double& v : m)
      if (!(ss >> v)) throw ParseError(path, lineno, "expected 12 numbers");
    RigidTransform t;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) t.rotation(r, c) = m[4 * r + c];
    t.translation = {m[3], m[7], m[11]};
    poses.push_back(t);
  }
  return poses;
}

// ---------------------------------------------------------------------------
// Scene description: `ground <h>`, `box <cx> <cy> <cz> <ex> <ey> <ez>`,
// `far <m>`, `#` comments
// ---------------------------------------------------------------------------

inline void write_scene(const std::string& path, const Scene& scene) {
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("write_scene: cannot open " + path);
  f.precision(17);
  f << "ground " << scene.ground_height << "\n";
  f << "far " << scene.far_plane << "\n";
  for (const Box& b : scene.obstacles)
    f << "box " << b.center.x << " " << b.center.y << " " << b.center.z << " "
      << b.extent.x << " " << b.extent.y << " " << b.extent.z << "\n";
}

inline Scene read_scene(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("read_scene: cannot open " + path);
  Scene scene;
  scene.obstacles.clear();
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key) || key[0] == '#') continue;
    auto num = [&]() {
      double v;
      if (!(ss >> v)) throw ParseError(path, lineno, "bad number after '" + key + "'");
      return v;
    };
    if (key == "ground") {
      scene.ground_height = num();
    } else if (key == "far") {
      scene.far_plane = num();
    } else if (key == "box") {
      Box b;
      b.center = {num(), num(), num()};
      b.extent = {num(), num(), num()};
      scene.obstacles.push_back(b);
    } else {
      throw ParseError(path, lineno, "unknown record '" + key + "'");
    }
  }
  scene.validate();
  return scene;
}

}  // namespace rdp
