#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sixdof {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

inline Point3 operator+(Point3 a, Point3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3 operator-(Point3 a, Point3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point3 operator*(double s, Point3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(Point3 a, Point3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Point3 cross(Point3 a, Point3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Point3 a) { return std::sqrt(dot(a, a)); }
inline bool is_finite(Point3 p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

// Unit-length direction. Construct through `Direction::normalized`.
class Direction {
 public:
  Direction() = default;

  // Throws InvalidParams for zero-length or non-finite input.
  static Direction normalized(Point3 v);

  double dx() const { return v_.x; }
  double dy() const { return v_.y; }
  double dz() const { return v_.z; }
  Point3 vec() const { return v_; }

  friend bool operator==(const Direction&, const Direction&) = default;

 private:
  explicit Direction(Point3 v) : v_(v) {}
  Point3 v_{0.0, 0.0, -1.0};
};

// Unit quaternion (w, x, y, z); rotates local vectors into world space.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quaternion from_axis_angle(Point3 axis, double angle);
  // Rotation taking local -Z onto `forward` with local +Y as close as possible to `up`.
  static Quaternion look_along(Point3 forward, Point3 up = {0.0, 1.0, 0.0});

  Quaternion normalized() const;
  Point3 rotate(Point3 v) const;
  Quaternion operator*(const Quaternion& o) const;
  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

struct Pose {
  Point3 position;
  Quaternion orientation;

  // Gaze direction: local -Z rotated into world space.
  Direction forward() const;
  Direction up() const;
  Direction right() const;
};

struct FrustumParams {
  double hfov = 1.5708;
  double vfov = 1.5708;
  double near = 0.05;
  double far = 100.0;

  // Throws InvalidParams unless 0 < fov < pi and 0 < near < far.
  void validate() const;
};

struct Plane {
  Point3 normal;  // unit, pointing into the volume
  double offset = 0.0;

  double signed_distance(Point3 p) const { return dot(normal, p) + offset; }
};

struct Frustum {
  std::array<Plane, 6> planes;  // near, far, left, right, bottom, top
  Point3 apex;
  Point3 forward;
};

Frustum build_frustum(const Pose& pose, const FrustumParams& params);

// Closed volume: points on a plane count as inside.
inline bool contains(const Frustum& frustum, Point3 p) {
  for (const Plane& plane : frustum.planes) {
    if (plane.signed_distance(p) < 0.0) return false;
  }
  return true;
}

struct PointCloudFrame {
  PointCloudFrame() = default;
  // Throws InvalidParams on an empty or non-finite point set.
  PointCloudFrame(std::int64_t frame_index, std::vector<Point3> points);

  std::int64_t frame_index = 0;
  std::vector<Point3> points;
  Point3 centroid;
};

// Sorted, duplicate-free indices into PointCloudFrame::points.
using ViewportSet = std::vector<std::uint32_t>;

ViewportSet viewport_set(const Frustum& frustum, const PointCloudFrame& cloud);

struct RayHit {
  Point3 p;
  double r = 0.0;
  std::uint32_t index = 0;
};

// Nearest cloud point (along the gaze ray) inside the cone of
// `cone_half_angle` around the forward axis. Empty when nothing is in the cone.
std::optional<RayHit> ray_cast_center(const Pose& pose, const PointCloudFrame& cloud,
                                      double cone_half_angle);

inline double euclidean_distance(Point3 a, Point3 b) { return norm(a - b); }

Point3 centroid_of(std::span<const Point3> points);

}  // namespace sixdof
