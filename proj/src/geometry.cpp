#include "sixdof/geometry.hpp"

#include <fmt/format.h>

#include <limits>
#include <numbers>

#include "sixdof/error.hpp"

namespace sixdof {

Direction Direction::normalized(Point3 v) {
  const double n = norm(v);
  if (!std::isfinite(n) || n == 0.0) {
    throw Error(ErrorKind::InvalidParams, "direction must be finite and non-zero");
  }
  return Direction{(1.0 / n) * v};
}

Quaternion Quaternion::from_axis_angle(Point3 axis, double angle) {
  const Point3 a = Direction::normalized(axis).vec();
  const double s = std::sin(angle / 2.0);
  return Quaternion{std::cos(angle / 2.0), a.x * s, a.y * s, a.z * s};
}

Quaternion Quaternion::normalized() const {
  const double n = norm();
  if (!std::isfinite(n) || n == 0.0) {
    throw Error(ErrorKind::InvalidParams, "quaternion must be finite and non-zero");
  }
  return Quaternion{w / n, x / n, y / n, z / n};
}

Quaternion Quaternion::operator*(const Quaternion& o) const {
  return Quaternion{w * o.w - x * o.x - y * o.y - z * o.z,
                    w * o.x + x * o.w + y * o.z - z * o.y,
                    w * o.y - x * o.z + y * o.w + z * o.x,
                    w * o.z + x * o.y - y * o.x + z * o.w};
}

Point3 Quaternion::rotate(Point3 v) const {
  // v' = v + 2w(u x v) + 2 u x (u x v), u = (x, y, z)
  const Point3 u{x, y, z};
  const Point3 t = 2.0 * cross(u, v);
  return v + w * t + cross(u, t);
}

Quaternion Quaternion::look_along(Point3 forward, Point3 up) {
  const Point3 f = Direction::normalized(forward).vec();
  Point3 r = cross(f, up);
  if (sixdof::norm(r) < 1e-9) {
    // forward parallel to up: pick any perpendicular reference
    r = cross(f, std::abs(f.x) < 0.9 ? Point3{1.0, 0.0, 0.0} : Point3{0.0, 0.0, 1.0});
  }
  r = Direction::normalized(r).vec();
  const Point3 u = cross(r, f);
  // Columns of the rotation matrix: local X -> r, local Y -> u, local Z -> -f.
  const double m00 = r.x, m01 = u.x, m02 = -f.x;
  const double m10 = r.y, m11 = u.y, m12 = -f.y;
  const double m20 = r.z, m21 = u.z, m22 = -f.z;
  const double trace = m00 + m11 + m22;
  Quaternion q;
  if (trace > 0.0) {
    const double s = std::sqrt(trace + 1.0) * 2.0;
    q = {0.25 * s, (m21 - m12) / s, (m02 - m20) / s, (m10 - m01) / s};
  } else if (m00 > m11 && m00 > m22) {
    const double s = std::sqrt(1.0 + m00 - m11 - m22) * 2.0;
    q = {(m21 - m12) / s, 0.25 * s, (m01 + m10) / s, (m02 + m20) / s};
  } else if (m11 > m22) {
    const double s = std::sqrt(1.0 + m11 - m00 - m22) * 2.0;
    q = {(m02 - m20) / s, (m01 + m10) / s, 0.25 * s, (m12 + m21) / s};
  } else {
    const double s = std::sqrt(1.0 + m22 - m00 - m11) * 2.0;
    q = {(m10 - m01) / s, (m02 + m20) / s, (m12 + m21) / s, 0.25 * s};
  }
  return q.normalized();
}

Direction Pose::forward() const {
  return Direction::normalized(orientation.rotate({0.0, 0.0, -1.0}));
}
Direction Pose::up() const { return Direction::normalized(orientation.rotate({0.0, 1.0, 0.0})); }
Direction Pose::right() const {
  return Direction::normalized(orientation.rotate({1.0, 0.0, 0.0}));
}

void FrustumParams::validate() const {
  constexpr double pi = std::numbers::pi;
  const bool ok = hfov > 0.0 && hfov < pi && vfov > 0.0 && vfov < pi && near > 0.0 &&
                  near < far && std::isfinite(far);
  if (!ok) {
    throw Error(ErrorKind::InvalidParams,
                fmt::format("invalid frustum params: hfov={} vfov={} near={} far={}", hfov,
                            vfov, near, far));
  }
}

Frustum build_frustum(const Pose& pose, const FrustumParams& params) {
  params.validate();
  if (!is_finite(pose.position)) {
    throw Error(ErrorKind::InvalidParams, "pose position must be finite");
  }
  const Pose unit_pose{pose.position, pose.orientation.normalized()};
  const Point3 f = unit_pose.forward().vec();
  const Point3 u = unit_pose.up().vec();
  const Point3 r = unit_pose.right().vec();
  const Point3 c = pose.position;

  const double ch = std::cos(params.hfov / 2.0), sh = std::sin(params.hfov / 2.0);
  const double cv = std::cos(params.vfov / 2.0), sv = std::sin(params.vfov / 2.0);

  auto through_apex = [&](Point3 n) { return Plane{n, -dot(n, c)}; };

  Frustum fr;
  fr.apex = c;
  fr.forward = f;
  fr.planes[0] = Plane{f, -(dot(f, c) + params.near)};
  fr.planes[1] = Plane{-1.0 * f, dot(f, c) + params.far};
  fr.planes[2] = through_apex(ch * r + sh * f);
  fr.planes[3] = through_apex(-ch * r + sh * f);
  fr.planes[4] = through_apex(cv * u + sv * f);
  fr.planes[5] = through_apex(-cv * u + sv * f);
  return fr;
}

Point3 centroid_of(std::span<const Point3> points) {
  Point3 sum{};
  for (const Point3& p : points) sum = sum + p;
  const double inv = points.empty() ? 0.0 : 1.0 / static_cast<double>(points.size());
  return inv * sum;
}

PointCloudFrame::PointCloudFrame(std::int64_t index, std::vector<Point3> pts)
    : frame_index(index), points(std::move(pts)) {
  if (points.empty()) {
    throw Error(ErrorKind::InvalidParams,
                fmt::format("point cloud frame {} is empty", frame_index));
  }
  for (const Point3& p : points) {
    if (!is_finite(p)) {
      throw Error(ErrorKind::InvalidParams,
                  fmt::format("point cloud frame {} has a non-finite point", frame_index));
    }
  }
  centroid = centroid_of(points);
}

ViewportSet viewport_set(const Frustum& frustum, const PointCloudFrame& cloud) {
  ViewportSet out;
  const auto n = static_cast<std::uint32_t>(cloud.points.size());
  for (std::uint32_t i = 0; i < n; ++i) {
    if (contains(frustum, cloud.points[i])) out.push_back(i);
  }
  return out;
}

std::optional<RayHit> ray_cast_center(const Pose& pose, const PointCloudFrame& cloud,
                                      double cone_half_angle) {
  if (!(cone_half_angle > 0.0 && cone_half_angle <= std::numbers::pi / 4.0)) {
    throw Error(ErrorKind::InvalidParams,
                fmt::format("cone half angle {} outside (0, pi/4]", cone_half_angle));
  }
  const Point3 f = Pose{pose.position, pose.orientation.normalized()}.forward().vec();
  const double cos_cone = std::cos(cone_half_angle);
  const Point3 c = pose.position;

  std::optional<RayHit> best;
  double best_t = std::numeric_limits<double>::infinity();
  const auto n = static_cast<std::uint32_t>(cloud.points.size());
  for (std::uint32_t i = 0; i < n; ++i) {
    const Point3 v = cloud.points[i] - c;
    const double t = dot(v, f);
    if (t <= 0.0 || t >= best_t) continue;
    if (t < norm(v) * cos_cone) continue;
    best_t = t;
    best = RayHit{cloud.points[i], norm(v), i};
  }
  return best;
}

}  // namespace sixdof
