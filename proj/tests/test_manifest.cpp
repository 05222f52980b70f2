#include <doctest.h>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sixdof/error.hpp"
#include "sixdof/manifest.hpp"
#include "sixdof/pipeline.hpp"
#include "sixdof/ply.hpp"

using namespace sixdof;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidParams;
}

// A tiny on-disk content: a sphere and two users looking at it.
fs::path make_content(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sixdof_manifest_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir / "clouds");
  SynthScenario s;
  s.points_per_frame = 500;
  s.n_frames = 10;
  s.groups = {GroupSpec{2, Orbit{2.0, 0.1, 0.0}, GazeAtCentroid{}, 0.05}};
  write_ply_points(dir / "clouds" / "frame_0.ply", generate_cloud_frame(s, 0).points,
                   PlyFormat::BinaryLittleEndian);
  write_trajectories(dir / "traj.csv", generate_trajectories(s));
  return dir;
}

std::string single(const std::string& extra = "") {
  return R"({"content_id":"c","cloud_dir":"clouds","trajectory_csv":"traj.csv","loop_content":true)" +
         extra + "}";
}

}  // namespace

TEST_CASE("manifest: single-content form with defaults") {
  const fs::path dir = make_content("single");
  const Manifest m = parse_manifest(single(), dir);
  REQUIRE(m.contents.size() == 1);
  CHECK(m.contents[0].content_id == "c");
  CHECK(m.contents[0].fps == 30.0);
  CHECK(m.contents[0].cloud_dir == dir / "clouds");
  CHECK(m.frustum.hfov == 1.5708);
  CHECK(m.overlap_threshold == 0.75);
  CHECK(m.relevant_min_size == 3);
  CHECK(m.config(MetricId::W8).threshold == 0.62);

  const auto ds = load_dataset(m, m.contents[0]);
  CHECK(ds.user_count() == 2);
  CHECK(ds.frame_count() == 10);
  fs::remove_all(dir);
}

TEST_CASE("manifest: overrides and list form") {
  const fs::path dir = make_content("list");
  const std::string text = R"({
    "contents": [
      {"content_id":"a","cloud_dir":"clouds","trajectory_csv":"traj.csv","loop_content":true},
      {"content_id":"b","cloud_dir":"clouds","trajectory_csv":"traj.csv","reference":false,
       "fps":60,"loop_content":true}
    ],
    "frustum": {"hfov": 1.0},
    "r_mode": "centroid",
    "metrics": {"w7": {"threshold": 0.5}},
    "chunk": {"window": 2}
  })";
  const Manifest m = parse_manifest(text, dir);
  REQUIRE(m.contents.size() == 2);
  CHECK_FALSE(m.contents[1].reference);
  CHECK(m.contents[1].fps == 60.0);
  CHECK(m.frustum.hfov == 1.0);
  CHECK(m.frustum.vfov == 1.5708);
  CHECK(m.r_mode == RMode::Centroid);
  CHECK(m.config(MetricId::W7).threshold == 0.5);
  CHECK(m.config(MetricId::W7).regulators.alpha == 0.25);
  CHECK(m.chunk.window == 2.0);
  CHECK(m.chunk.persistence == 0.8);

  std::ostringstream out;
  write_manifest(out, m);
  const Manifest back = parse_manifest(out.str(), "/");
  std::ostringstream again;
  write_manifest(again, back);
  CHECK(out.str() == again.str());
  fs::remove_all(dir);
}

TEST_CASE("manifest: errors") {
  const fs::path dir = make_content("errors");
  CHECK(kind_of([&] { parse_manifest(single(R"(,"colour":1)"), dir); }) == ErrorKind::Schema);
  CHECK(kind_of([&] { parse_manifest(R"({"contents":[{"content_id":"a","cloud_dir":"clouds","trajectory_csv":"traj.csv","x":1}]})", dir); }) ==
        ErrorKind::Schema);
  CHECK(kind_of([&] { parse_manifest(single(R"(,"metrics":{"w9":{}})"), dir); }) == ErrorKind::Schema);
  CHECK(kind_of([&] { parse_manifest("{not json", dir); }) == ErrorKind::Parse);
  CHECK(kind_of([&] { parse_manifest(single(R"(,"r_mode":"sideways")"), dir); }) != ErrorKind::Io);
  try {
    parse_manifest(R"({"content_id":"c","cloud_dir":"nowhere_dir","trajectory_csv":"traj.csv"})", dir);
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
    CHECK(std::string(e.what()).find("nowhere_dir") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("calibration file: round trip and application") {
  const fs::path dir = fs::temp_directory_path() / "sixdof_calibration";
  fs::create_directories(dir);
  CalibrationFile c;
  c.target_tpr = 0.8;
  c.overlap_threshold = 0.7;
  c.metrics[MetricId::W1] = {MetricId::W1, {0.5, 0, 0}, 0.33};
  c.metrics[MetricId::W7] = {MetricId::W7, {0.25, 0.5, 0.5}, 0.61};
  c.achieved[MetricId::W1] = {0.33, 0.76, 0.2};
  {
    std::ofstream out(dir / "cal.json");
    write_calibration_json(out, c);
  }
  const auto back = load_calibration(dir / "cal.json");
  CHECK(back.target_tpr == 0.8);
  CHECK(back.overlap_threshold == 0.7);
  REQUIRE(back.metrics.size() == 2);
  CHECK(back.metrics.at(MetricId::W1).threshold == 0.33);
  CHECK(back.metrics.at(MetricId::W1).regulators.alpha == 0.5);
  CHECK(back.metrics.at(MetricId::W7).threshold == 0.61);

  Manifest m;
  apply_calibration(m, back);
  CHECK(m.config(MetricId::W1).threshold == 0.33);
  CHECK(m.config(MetricId::W2).threshold == 0.80);
  CHECK(m.overlap_threshold == 0.7);
  fs::remove_all(dir);
}

TEST_CASE("scenario json: round trip and preset") {
  const auto s = planted_orbit_scenario(9);
  const std::string text = scenario_to_json(s);
  CHECK(scenario_to_json(parse_scenario(text)) == text);
  CHECK(generate_trajectories(parse_scenario(text)) == generate_trajectories(s));

  const auto preset = parse_scenario(R"({"preset":"planted-orbits","seed":9})");
  CHECK(scenario_to_json(preset) == text);
  CHECK_THROWS_AS(parse_scenario(R"({"seed":1,"bogus":true})"), Error);
}

TEST_CASE("pipeline: features of a manifest content") {
  const fs::path dir = make_content("pipeline");
  const Manifest m = parse_manifest(single(), dir);
  const auto tables = manifest_features(m, true, true, {1});
  REQUIRE(tables.size() == 1);
  CHECK(tables[0].user_count() == 2);
  CHECK(tables[0].frame_count() == 10);
  CHECK(tables[0].has_overlap());
  RunOptions part{1, 2, 5};
  CHECK(manifest_features(m, false, false, part)[0].frame_count() == 3);
  CHECK(ablation_tables(m, tables).size() == 1);
  fs::remove_all(dir);
}
