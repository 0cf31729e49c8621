#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rdp {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

// Row-major 3x3 matrix, just enough linear algebra for rigid transforms.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return Mat3{}; }

  double operator()(int r, int c) const { return m[3 * r + c]; }
  double& operator()(int r, int c) { return m[3 * r + c]; }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }

  Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
    return r;
  }

  double det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) -
           m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }
};

// SE(3) pose. Applies as R*p + t.
struct RigidTransform {
  Mat3 rotation;
  Vec3 translation;

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    Mat3 rt = rotation.transposed();
    Vec3 t = rt * translation;
    return {rt, {-t.x, -t.y, -t.z}};
  }

  // RtR = I and det = +1, both within tol.
  bool is_valid(double tol = 1e-9) const {
    Mat3 g = rotation.transposed() * rotation;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double want = i == j ? 1.0 : 0.0;
        if (std::abs(g(i, j) - want) > tol) return false;
      }
    return std::abs(rotation.det() - 1.0) <= tol;
  }
};

// compose(a, b): applying the result equals applying b first, then a.
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

struct CameraIntrinsics {
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;

  void validate() const {
    if (fx <= 0.0 || fy <= 0.0)
      throw std::invalid_argument("intrinsics: focal lengths must be positive");
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("intrinsics: image size must be positive");
    if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
      throw std::invalid_argument("intrinsics: principal point outside image");
  }
};

// Optional per-point payload (rcs, vx, vy); carried through transforms,
// ignored by rendering.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<std::array<double, 3>> attributes;  // empty or points.size()

  std::size_t size() const { return points.size(); }
  bool has_attributes() const { return !attributes.empty(); }
};

// Dense raster of depths in meters; 0 encodes "no measurement".
// Stored as float32 so the PFM round trip is lossless; math is done in double.
struct DepthMap {
  int width = 0, height = 0;
  std::vector<float> data;

  DepthMap() = default;
  DepthMap(int w, int h) : width(w), height(h), data(std::size_t(w) * h, 0.0f) {}

  float at(int x, int y) const { return data[std::size_t(y) * width + x]; }
  float& at(int x, int y) { return data[std::size_t(y) * width + x]; }
  bool valid_at(int x, int y) const { return at(x, y) > 0.0f; }
  std::size_t pixel_count() const { return data.size(); }

  bool same_size(const DepthMap& o) const {
    return width == o.width && height == o.height;
  }
};

struct PixelDepth {
  int u = 0, v = 0;
  double depth = 0.0;
};

// Pinhole projection. Points behind the camera or outside the half-open
// pixel domain [0,w)x[0,h) are dropped; continuous coordinates are floored.
inline std::vector<PixelDepth> project_points(const PointCloud& cloud,
                                              const CameraIntrinsics& intr) {
  std::vector<PixelDepth> out;
  out.reserve(cloud.size());
  for (const Vec3& p : cloud.points) {
    if (p.z <= 0.0) continue;
    const double uf = intr.fx * p.x / p.z + intr.cx;
    const double vf = intr.fy * p.y / p.z + intr.cy;
    const int u = int(std::floor(uf));
    const int v = int(std::floor(vf));
    if (u < 0 || u >= intr.width || v < 0 || v >= intr.height) continue;
    out.push_back({u, v, p.z});
  }
  return out;
}

inline Vec3 backproject(double u, double v, double depth,
                        const CameraIntrinsics& intr) {
  if (depth <= 0.0)
    throw std::invalid_argument("backproject: depth must be positive");
  return {(u - intr.cx) * depth / intr.fx, (v - intr.cy) * depth / intr.fy,
          depth};
}

inline PointCloud transform_points(const PointCloud& cloud,
                                   const RigidTransform& t) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const Vec3& p : cloud.points) out.points.push_back(t.apply(p));
  out.attributes = cloud.attributes;
  return out;
}

}  // namespace rdp
