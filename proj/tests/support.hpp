#pragma once

// Small generators shared by the test binaries. Deliberately independent of
// the library's own RNG so a bug there cannot hide in the fixtures.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "sixdof/geometry.hpp"

namespace testgen {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline sixdof::Point3 random_point(Rng& rng, double half_extent) {
  return {uniform(rng, -half_extent, half_extent), uniform(rng, -half_extent, half_extent),
          uniform(rng, -half_extent, half_extent)};
}

inline sixdof::Point3 random_unit(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    sixdof::Point3 v{n(rng), n(rng), n(rng)};
    const double len = sixdof::norm(v);
    if (len > 1e-6) return (1.0 / len) * v;
  }
}

inline sixdof::Quaternion random_rotation(Rng& rng) {
  return sixdof::Quaternion::from_axis_angle(random_unit(rng),
                                             uniform(rng, 0.0, 2.0 * std::numbers::pi));
}

inline std::vector<sixdof::Point3> random_cloud(Rng& rng, std::size_t n, double half_extent) {
  std::vector<sixdof::Point3> pts(n);
  for (auto& p : pts) p = random_point(rng, half_extent);
  return pts;
}

// Fibonacci sphere: evenly spread, deterministic.
inline std::vector<sixdof::Point3> sphere_cloud(std::size_t n, double radius,
                                                sixdof::Point3 centre = {}) {
  std::vector<sixdof::Point3> pts;
  pts.reserve(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double y = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double rad = std::sqrt(1.0 - y * y);
    const double th = golden * static_cast<double>(i);
    pts.push_back(centre + radius * sixdof::Point3{rad * std::cos(th), y, rad * std::sin(th)});
  }
  return pts;
}

}  // namespace testgen
