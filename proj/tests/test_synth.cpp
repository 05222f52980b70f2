#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "sixdof/error.hpp"
#include "sixdof/evaluation.hpp"
#include "sixdof/features.hpp"
#include "sixdof/ply.hpp"
#include "sixdof/synth.hpp"

using namespace sixdof;

namespace {

SynthScenario sphere_scenario(std::size_t points) {
  SynthScenario s;
  s.points_per_frame = points;
  s.n_frames = 2;
  s.groups = {GroupSpec{}};
  return s;
}

std::string ply_bytes(const PointCloudFrame& f) {
  std::ostringstream out;
  write_ply_points(out, f.points, PlyFormat::BinaryLittleEndian);
  return out.str();
}

}  // namespace

TEST_CASE("splitmix64: reference sequence and ranges") {
  // first outputs for seed 0 of the published splitmix64 generator
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xE220A8397B1DCDAFull);
  CHECK(rng.next() == 0x6E789E6AA1B965F4ull);
  CHECK(rng.next() == 0x06C45D188009454Full);
  SplitMix64 u(42);
  double mean = 0;
  for (int k = 0; k < 100000; ++k) {
    const double x = u.uniform();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    mean += x;
  }
  CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST_CASE("synth cloud: sphere points lie on the surface") {
  const auto f = generate_cloud_frame(sphere_scenario(1000), 0);
  REQUIRE(f.points.size() == 1000);
  const double radius = kContentHeight / 2.0;
  for (const auto& p : f.points) CHECK(std::abs(norm(p) - radius) < 1e-6);
}

TEST_CASE("synth cloud: centroid near the origin") {
  for (std::size_t n : {500u, 2000u, 8000u}) {
    const auto f = generate_cloud_frame(sphere_scenario(n), 0);
    Point3 sum{};
    for (const auto& p : f.points) sum = sum + p;
    const Point3 c = (1.0 / static_cast<double>(n)) * sum;
    // far tighter than the 0.9 / sqrt(n) spread of independent samples
    CHECK(norm(c) < 0.9 / std::sqrt(static_cast<double>(n)));
    CHECK(norm(c - f.centroid) < 1e-9);
  }
}

TEST_CASE("synth cloud: deterministic bytes, other kinds in bounds") {
  const auto s = sphere_scenario(3000);
  CHECK(ply_bytes(generate_cloud_frame(s, 0)) == ply_bytes(generate_cloud_frame(s, 0)));
  CHECK(is_static(CloudKind::Sphere));
  CHECK(is_static(CloudKind::Cylinder));
  CHECK_FALSE(is_static(CloudKind::HumanoidBlocks));
  for (CloudKind kind : {CloudKind::Cylinder, CloudKind::HumanoidBlocks}) {
    SynthScenario k = s;
    k.cloud_kind = kind;
    for (std::size_t frame : {0u, 1u}) {
      const auto f = generate_cloud_frame(k, frame);
      CHECK(f.points.size() == 3000);
      for (const auto& p : f.points) {
        CHECK(std::abs(p.y) <= kContentHeight / 2.0 + 1e-6);
      }
    }
    CHECK(parse_cloud_kind(to_string(kind)) == kind);
  }
  SynthScenario moving = s;
  moving.cloud_kind = CloudKind::HumanoidBlocks;
  CHECK(ply_bytes(generate_cloud_frame(moving, 0)) != ply_bytes(generate_cloud_frame(moving, 1)));
}

TEST_CASE("synth trajectories: opposite orbit phases are four metres apart") {
  SynthScenario s = sphere_scenario(100);
  s.n_frames = 30;
  s.groups = {GroupSpec{1, Orbit{2.0, 0.3, 0.0}, GazeAtCentroid{}, 0.0},
              GroupSpec{1, Orbit{2.0, 0.3, std::numbers::pi}, GazeAtCentroid{}, 0.0}};
  const auto trs = generate_trajectories(s);
  REQUIRE(trs.size() == 2);
  CHECK(trs[0].user_id == "u000");
  CHECK(trs[1].user_id == "u001");
  for (std::size_t f = 0; f < 30; ++f) {
    CHECK(euclidean_distance(trs[0].samples[f].x, trs[1].samples[f].x) == doctest::Approx(4.0));
    CHECK(trs[0].samples[f].t == doctest::Approx(f / 30.0));
    // gaze at the centroid
    const Point3 to_c = -1.0 * trs[0].samples[f].x;
    CHECK(dot(trs[0].samples[f].view().vec(), (1.0 / norm(to_c)) * to_c) == doctest::Approx(1.0));
  }
}

TEST_CASE("synth trajectories: pure function of the seed") {
  auto s = planted_orbit_scenario(5);
  const auto a = generate_trajectories(s);
  CHECK(generate_trajectories(s) == a);
  s.seed = 6;
  CHECK_FALSE(generate_trajectories(s) == a);
}

TEST_CASE("synth: co-located static viewers overlap fully") {
  SynthScenario s = sphere_scenario(2000);
  s.n_frames = 5;
  s.groups = {GroupSpec{3, Static{{0.0, 0.0, 2.5}}, GazeAtCentroid{}, 0.0}};
  const auto ds = make_dataset(s);
  FeatureOptions opt;
  opt.frustum = s.frustum;
  opt.geodesic = false;
  opt.threads = 1;
  const auto table = compute_features(ds, opt);
  for (std::size_t f = 0; f < table.frame_count(); ++f) {
    const auto o = table.overlap_matrix(f);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j) CHECK(*o.get(i, j) == 1.0);
  }
}

TEST_CASE("synth: planted partition and adjusted rand index") {
  const auto s = planted_orbit_scenario(0);
  CHECK(s.user_count() == 12);
  const auto labels = planted_labels(s);
  CHECK(labels == std::vector<std::size_t>{0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2});
  const auto part = planted_partition(s);
  CHECK(part.clusters.size() == 3);
  CHECK(labels_of(part) == labels);
  CHECK(adjusted_rand_index(labels, labels) == doctest::Approx(1.0));
  std::vector<std::size_t> renamed;
  for (auto l : labels) renamed.push_back(2 - l);
  CHECK(adjusted_rand_index(labels, renamed) == doctest::Approx(1.0));
  // hand-computed contingency example
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 0, 1, 2}) == doctest::Approx(4.0 / 7.0));
}

TEST_CASE("synth: planted orbits separate under the exact overlap") {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const auto s = planted_orbit_scenario(seed);
    const auto ds = make_dataset(s);
    FeatureOptions opt;
    opt.frustum = s.frustum;
    opt.geodesic = false;
    const auto table = compute_features(ds, opt);
    const auto labels = planted_labels(s);
    double intra_min = 1.0, inter_max = 0.0;
    for (std::size_t f = 0; f < table.frame_count(); ++f) {
      const auto o = table.overlap_matrix(f);
      for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t j = i + 1; j < labels.size(); ++j) {
          REQUIRE(o.valid(i, j));
          if (labels[i] == labels[j]) intra_min = std::min(intra_min, o.value(i, j));
          else inter_max = std::max(inter_max, o.value(i, j));
        }
      }
    }
    INFO("seed " << seed);
    CHECK(intra_min > 0.8);
    CHECK(inter_max < 0.2);
  }
}

TEST_CASE("synth: scenario validation") {
  SynthScenario s = sphere_scenario(10);
  s.groups.clear();
  CHECK_THROWS_AS(s.validate(), Error);
  s = sphere_scenario(0);
  CHECK_THROWS_AS(s.validate(), Error);
  s = sphere_scenario(10);
  s.fps = 0;
  CHECK_THROWS_AS(s.validate(), Error);
}
