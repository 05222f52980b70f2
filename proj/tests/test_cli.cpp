#include <doctest.h>
#include <fmt/format.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sixdof/manifest.hpp"
#include "sixdof/pipeline.hpp"

using namespace sixdof;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string output;  // stdout and stderr
};

Run run_cli(const std::string& args) {
  const std::string cmd = fmt::format("\"{}\" {} 2>&1", SIXDOF_CLI_PATH, args);
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

fs::path fresh(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sixdof_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Six users in two orbiting groups over 45 frames: two chunks at 30 fps.
fs::path small_dataset(const std::string& name) {
  const fs::path dir = fresh(name);
  SynthScenario s;
  s.seed = 4;
  s.points_per_frame = 1500;
  s.n_frames = 45;
  s.eye_height = 0.5;
  s.frustum = {0.6, 0.6, 0.05, 100};
  s.groups = {GroupSpec{3, Orbit{2.0, 0.2, 0.0}, GazeJittered{0.02}, 0.05},
              GroupSpec{3, Orbit{2.0, 0.2, 3.1}, GazeJittered{0.02}, 0.05}};
  {
    std::ofstream out(dir / "scenario.in.json");
    out << scenario_to_json(s);
  }
  const auto r = run_cli(fmt::format("synth --scenario {} --out {}", (dir / "scenario.in.json").string(),
                                     (dir / "data").string()));
  REQUIRE_MESSAGE(r.code == 0, r.output);
  return dir;
}

}  // namespace

TEST_CASE("cli: usage errors exit 2") {
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("overlap").code == 2);  // no manifest
  CHECK(run_cli("synth --preset nope --out /tmp/sixdof_cli_unused").code == 2);
  CHECK(run_cli("bench --points abc").code == 2);
  CHECK(run_cli("--help").code == 0);
}

TEST_CASE("cli: missing cloud directory exits 3 and names it") {
  const fs::path dir = fresh("missing");
  {
    std::ofstream(dir / "traj.csv") << "user_id,t,pos_x,pos_y,pos_z,quat_w,quat_x,quat_y,quat_z\n";
    std::ofstream(dir / "m.json")
        << R"({"content_id":"x","cloud_dir":"no_such_clouds","trajectory_csv":"traj.csv"})";
  }
  const auto r = run_cli(fmt::format("overlap --manifest {} --out {}", (dir / "m.json").string(),
                                     dir.string()));
  CHECK(r.code == 3);
  CHECK(r.output.find("no_such_clouds") != std::string::npos);
}

TEST_CASE("cli: synth writes a dataset the manifest loader accepts") {
  const fs::path dir = small_dataset("synth");
  const fs::path data = dir / "data";
  for (const char* f : {"manifest.json", "trajectories.csv", "labels.csv", "scenario.json",
                        "clouds/frame_00000.ply"}) {
    CHECK(fs::exists(data / f));
  }
  CHECK(line_count(slurp(data / "labels.csv")) == 7);
  const Manifest m = load_manifest(data / "manifest.json");
  CHECK(m.frustum.hfov == 0.6);
  CHECK(load_dataset(m, m.contents[0]).user_count() == 6);
  // the scenario copy keeps the seed of the input file
  CHECK(slurp(data / "scenario.json") == slurp(dir / "scenario.in.json"));
}

TEST_CASE("cli: overlap csv matches the in-memory matrices") {
  const fs::path dir = small_dataset("overlap");
  const fs::path manifest = dir / "data" / "manifest.json";
  const auto r = run_cli(fmt::format("overlap --manifest {} --out {}", manifest.string(),
                                     (dir / "out").string()));
  REQUIRE_MESSAGE(r.code == 0, r.output);
  const Manifest m = load_manifest(manifest);
  const std::string name = "overlap_" + m.contents[0].content_id + ".csv";
  const std::string text = slurp(dir / "out" / name);
  CHECK(line_count(text) == 1 + 45 * 15);

  std::istringstream in(text);
  const auto table = read_matrices_csv(in);
  const auto features = manifest_features(m, true, false, {1});
  const auto expected = overlap_matrices(features[0], 1);
  REQUIRE(table.matrices.size() == expected.size());
  for (std::size_t f = 0; f < expected.size(); ++f) CHECK(table.matrices[f] == expected[f]);

  const auto part = run_cli(fmt::format("overlap --manifest {} --out {} --frames 2:5",
                                        manifest.string(), (dir / "part").string()));
  REQUIRE(part.code == 0);
  CHECK(line_count(slurp(dir / "part" / name)) == 1 + 3 * 15);
  CHECK(run_cli(fmt::format("overlap --manifest {} --frames 5:2", manifest.string())).code == 2);
}

TEST_CASE("cli: outputs do not depend on the thread count") {
  const fs::path dir = small_dataset("threads");
  const std::string manifest = (dir / "data" / "manifest.json").string();
  for (const char* cmd : {"metrics", "cluster --metric w1,w7", "evaluate --metric w1,w4,overlap",
                          "ablate --metric w1,w7 --grid 0,0.5,1"}) {
    const auto a = run_cli(fmt::format("{} --manifest {} --threads 1 --out {}", cmd, manifest,
                                       (dir / "t1").string()));
    const auto b = run_cli(fmt::format("{} --manifest {} --threads 3 --out {}", cmd, manifest,
                                       (dir / "t3").string()));
    REQUIRE_MESSAGE(a.code == 0, a.output);
    REQUIRE_MESSAGE(b.code == 0, b.output);
  }
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(dir / "t1")) {
    const fs::path other = dir / "t3" / e.path().filename();
    REQUIRE(fs::exists(other));
    CHECK_MESSAGE(slurp(e.path()) == slurp(other), e.path().filename().string());
    ++compared;
  }
  CHECK(compared >= 8);
}

TEST_CASE("cli: calibrate then evaluate with the calibration file") {
  const fs::path dir = small_dataset("calibrate");
  const std::string manifest = (dir / "data" / "manifest.json").string();
  const auto cal = run_cli(fmt::format("calibrate --manifest {} --metric w1,w4 --out {}", manifest,
                                       (dir / "c").string()));
  REQUIRE_MESSAGE(cal.code == 0, cal.output);
  CHECK(fs::exists(dir / "c" / "roc_w1.csv"));
  const auto file = load_calibration(dir / "c" / "calibration.json");
  CHECK(file.metrics.count(MetricId::W1) == 1);

  const auto ev = run_cli(fmt::format("evaluate --manifest {} --calibration {} --metric w1 --out {}",
                                      manifest, (dir / "c" / "calibration.json").string(),
                                      (dir / "e").string()));
  REQUIRE_MESSAGE(ev.code == 0, ev.output);
  const std::string summary = slurp(dir / "e" / "summary.csv");
  CHECK(summary.rfind("content,metric,", 0) == 0);
  CHECK(summary.find("All,w1") != std::string::npos);
}

TEST_CASE("cli: bench with zero pairs exits cleanly") {
  const fs::path dir = fresh("bench");
  const auto r = run_cli(fmt::format("bench --points 1000 --pairs 0 --out {}", dir.string()));
  CHECK(r.code == 0);
  CHECK(slurp(dir / "bench.csv") == "metric,seconds_per_pair_frame,cv,speedup,evaluations\n");
  const auto small = run_cli(fmt::format("bench --points 2000 --pairs 2 --frames 2 --repeats 1 --out {}",
                                         dir.string()));
  REQUIRE_MESSAGE(small.code == 0, small.output);
  CHECK(line_count(slurp(dir / "bench.csv")) == 10);
}
