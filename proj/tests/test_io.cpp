#include <doctest.h>
#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sixdof/cloud_sequence.hpp"
#include "sixdof/error.hpp"
#include "sixdof/ply.hpp"
#include "sixdof/trajectory.hpp"
#include "support.hpp"

using namespace sixdof;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sixdof_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Point3 as_float(Point3 p) {
  return {static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z)};
}

template <typename T>
void put_be(std::string& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::little) std::reverse(buf, buf + sizeof(T));
  out.append(reinterpret_cast<char*>(buf), sizeof(T));
}

std::string pose_csv(const std::vector<std::string>& rows) {
  std::string s = "user_id,t,pos_x,pos_y,pos_z,quat_w,quat_x,quat_y,quat_z\n";
  for (const auto& r : rows) s += r + "\n";
  return s;
}

std::vector<Trajectory> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_trajectories(in, "test.csv");
}

Trajectory raw_at(const std::string& id, const std::vector<double>& times) {
  Trajectory tr{id, {}};
  for (double t : times) {
    TrajectorySample s;
    s.t = t;
    s.x = {t, 0, 0};
    tr.samples.push_back(s);
  }
  return tr;
}

}  // namespace

TEST_CASE("ply: ascii and binary round trip at float precision") {
  testgen::Rng rng(1);
  const auto pts = testgen::random_cloud(rng, 257, 3.0);
  for (PlyFormat format : {PlyFormat::Ascii, PlyFormat::BinaryLittleEndian}) {
    std::stringstream buf;
    write_ply_points(buf, pts, format);
    const auto back = read_ply_points(buf);
    REQUIRE(back.size() == pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(back[i] == as_float(pts[i]));
  }
}

TEST_CASE("ply: big-endian doubles with extra properties and faces") {
  std::string body;
  const std::vector<Point3> pts = {{1.5, -2.25, 3.0}, {0.1, 0.2, 0.3}};
  for (const auto& p : pts) {
    put_be<std::uint8_t>(body, 200);
    put_be<double>(body, p.x);
    put_be<double>(body, p.y);
    put_be<double>(body, p.z);
  }
  put_be<std::uint8_t>(body, 3);
  for (std::int32_t i : {0, 1, 0}) put_be<std::int32_t>(body, i);
  const std::string header =
      "ply\nformat binary_big_endian 1.0\ncomment made by hand\n"
      "element vertex 2\nproperty uchar red\nproperty double x\nproperty double y\n"
      "property double z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n";
  std::istringstream in(header + body);
  const auto back = read_ply_points(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == pts[0]);
  CHECK(back[1] == pts[1]);
}

TEST_CASE("ply: malformed input raises parse errors") {
  auto parse_ply = [](const std::string& s) {
    std::istringstream in(s);
    return read_ply_points(in);
  };
  CHECK_THROWS_AS(parse_ply("not a ply\n"), Error);
  CHECK_THROWS_AS(parse_ply("ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\n"
                            "property float y\nproperty float z\nend_header\n1 2 3\n"),
                  Error);
  CHECK_THROWS_AS(parse_ply("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\n"
                            "property float y\nend_header\n1 2\n"),
                  Error);
  try {
    parse_ply("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
              "property float z\nend_header\n1 zz 3\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
  }
}

TEST_CASE("ply: frame files ordered numerically and read lazily") {
  const fs::path dir = scratch_dir("frames");
  for (int f : {10, 2, 1}) {
    write_ply_points(dir / ("frame_" + std::to_string(f) + ".ply"),
                     {{static_cast<double>(f), 0, 0}}, PlyFormat::Ascii);
  }
  const auto files = list_frame_files(dir);
  REQUIRE(files.size() == 3);
  CHECK(files[0].filename() == "frame_1.ply");
  CHECK(files[2].filename() == "frame_10.ply");

  const auto seq = CloudSequence::from_directory(dir);
  CHECK(seq->size() == 3);
  CHECK(seq->at(2)->points[0].x == 10.0);
  CHECK_THROWS_AS(seq->at(3), Error);

  const auto looped = CloudSequence::from_directory(dir, true);
  CHECK(looped->at(4)->points[0].x == 2.0);

  try {
    CloudSequence::from_directory(dir / "missing");
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
    CHECK(std::string(e.what()).find("missing") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("trajectories: two users, three rows each") {
  const auto trs = parse(pose_csv({"b,0,0,0,0,1,0,0,0", "a,0,1,0,0,1,0,0,0", "b,0.1,0,0,0,1,0,0,0",
                                   "a,0.1,1,0,0,1,0,0,0", "a,0.2,1,0,0,1,0,0,0",
                                   "b,0.2,0,0,0,1,0,0,0"}));
  REQUIRE(trs.size() == 2);
  CHECK(trs[0].user_id == "a");
  CHECK(trs[1].user_id == "b");
  CHECK(trs[0].samples.size() == 3);
  CHECK(trs[1].samples.size() == 3);
  CHECK(trs[0].samples[0].off_content);
}

TEST_CASE("trajectories: NaN position names its line") {
  try {
    parse(pose_csv({"a,0,0,0,0,1,0,0,0", "a,0.1,nan,0,0,1,0,0,0"}));
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("user_id,t,pos_x\n"), Error);
  CHECK_THROWS_AS(parse(pose_csv({"a,0,0,0,0,0,0,0,0"})), Error);
  CHECK_THROWS_AS(parse(pose_csv({"a,0,0,0,0,1,0,0,0", "a,0,0,0,0,1,0,0,0"})), Error);
  CHECK_THROWS_AS(parse(pose_csv({"a,0,0,0,0,1,0,0"})), Error);
}

TEST_CASE("trajectories: row order does not matter") {
  testgen::Rng rng(4);
  std::vector<std::string> rows;
  for (int u = 0; u < 4; ++u) {
    for (int k = 0; k < 25; ++k) {
      rows.push_back(fmt::format("u{},{},{},{},{},1,{},0,0", u, k / 30.0, testgen::uniform(rng),
                                 testgen::uniform(rng), testgen::uniform(rng),
                                 testgen::uniform(rng, -0.5, 0.5)));
    }
  }
  const auto sorted = parse(pose_csv(rows));
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(rows.begin(), rows.end(), rng);
    CHECK(parse(pose_csv(rows)) == sorted);
  }
}

TEST_CASE("trajectories: precomputed p/r columns and write round trip") {
  const std::string text =
      "user_id,t,pos_x,pos_y,pos_z,quat_w,quat_x,quat_y,quat_z,p_x,p_y,p_z,r\n"
      "a,0,0,0,2,1,0,0,0,0,0,1,1\n"
      "a,0.5,0,0,2,1,0,0,0,,,,\n";
  const auto trs = parse(text);
  REQUIRE(trs.size() == 1);
  CHECK_FALSE(trs[0].samples[0].off_content);
  CHECK(*trs[0].samples[0].r == 1.0);
  CHECK(trs[0].samples[1].off_content);
  CHECK_THROWS_AS(parse("user_id,t,pos_x,pos_y,pos_z,quat_w,quat_x,quat_y,quat_z,p_x,p_y,p_z,r\n"
                        "a,0,0,0,2,1,0,0,0,0,0,1,\n"),
                  Error);

  std::ostringstream out;
  write_trajectories(out, trs);
  CHECK(parse(out.str()) == trs);
}

TEST_CASE("align: exact frame times are unchanged") {
  const auto aligned = align_to_frames({raw_at("a", {0, 1.0 / 30, 2.0 / 30})}, 30.0);
  REQUIRE(aligned[0].samples.size() == 3);
  for (std::int64_t f = 0; f < 3; ++f) {
    const auto& s = aligned[0].samples[static_cast<std::size_t>(f)];
    CHECK(s.frame == f);
    CHECK_FALSE(s.gap);
    CHECK(s.x.x == doctest::Approx(static_cast<double>(f) / 30.0));
  }
}

TEST_CASE("align: 90 Hz capture keeps every third sample") {
  std::vector<double> times;
  for (int i = 0; i < 90; ++i) times.push_back(i / 90.0);
  const auto aligned = align_to_frames({raw_at("a", times)}, 30.0);
  // last capture at 89/90 s still rounds to frame 30
  REQUIRE(aligned[0].samples.size() == 31);
  for (std::size_t f = 0; f < 30; ++f) {
    CHECK(aligned[0].samples[f].x.x == times[3 * f]);
  }
}

TEST_CASE("align: one second without captures becomes thirty gap frames") {
  std::vector<double> times;
  for (int f = 0; f < 90; ++f) {
    if (f >= 30 && f < 60) continue;
    times.push_back(f / 30.0);
  }
  const auto aligned = align_to_frames({raw_at("a", times), raw_at("b", {0.0, 0.5})}, 30.0);
  REQUIRE(aligned[0].samples.size() == 90);
  REQUIRE(aligned[1].samples.size() == 90);  // padded to the longest user
  const auto gaps = std::count_if(aligned[0].samples.begin(), aligned[0].samples.end(),
                                  [](const TrajectorySample& s) { return s.gap; });
  CHECK(gaps == 30);
  for (std::size_t f = 30; f < 60; ++f) {
    CHECK(aligned[0].samples[f].gap);
    CHECK_FALSE(aligned[0].samples[f].on_content());
  }
}

TEST_CASE("align: idempotent and validates input") {
  testgen::Rng rng(6);
  std::vector<Trajectory> raw;
  for (int u = 0; u < 3; ++u) {
    std::vector<double> times;
    double t = testgen::uniform(rng, 0, 0.1);
    while (t < 4.0) {
      times.push_back(t);
      t += testgen::uniform(rng, 0.005, 0.2);
    }
    raw.push_back(raw_at("u" + std::to_string(u), times));
  }
  const auto once = align_to_frames(raw, 30.0);
  CHECK(align_to_frames(once, 30.0) == once);
  CHECK_THROWS_AS(align_to_frames(raw, 0.0), Error);
  CHECK_THROWS_AS(align_to_frames({Trajectory{"x", {}}}, 30.0), Error);
}

TEST_CASE("derive_pr: orbiting viewer sees r close to the sphere radius") {
  const auto sphere = testgen::sphere_cloud(20000, 1.0);
  const double spacing = std::sqrt(4.0 * std::numbers::pi / 20000.0);
  std::vector<PointCloudFrame> frames;
  frames.emplace_back(0, sphere);
  const auto clouds = CloudSequence::in_memory(frames, true);

  Trajectory tr{"a", {}};
  for (int f = 0; f < 60; ++f) {
    const double th = 2.0 * std::numbers::pi * f / 60.0;
    TrajectorySample s;
    s.t = f / 30.0;
    s.frame = f;
    s.x = {2.0 * std::sin(th), 0.0, 2.0 * std::cos(th)};
    s.orientation = Quaternion::look_along(-1.0 * s.x);
    tr.samples.push_back(s);
  }
  const Trajectory out = derive_pr(tr, *clouds, FrustumParams{}, 0.035);
  for (std::size_t f = 0; f < out.samples.size(); ++f) {
    const auto& s = out.samples[f];
    REQUIRE(s.on_content());
    CHECK(std::abs(*s.r - 1.0) <= 2 * spacing);
    CHECK(s.x == tr.samples[f].x);
    CHECK(s.orientation == tr.samples[f].orientation);
    CHECK(s.t == tr.samples[f].t);
    // oracle: nearest-in-cone along the ray
    const auto hit = ray_cast_center(s.pose(), *clouds->at(0), 0.035);
    CHECK(*s.p == hit->p);
  }

  SUBCASE("facing away is off content") {
    Trajectory away = tr;
    for (auto& s : away.samples) s.orientation = Quaternion::look_along(s.x);
    for (const auto& s : derive_pr(away, *clouds, FrustumParams{}, 0.035).samples) {
      CHECK(s.off_content);
      CHECK_FALSE(s.p);
    }
  }
  SUBCASE("already derived input is a precondition error") {
    try {
      derive_pr(out, *clouds, FrustumParams{}, 0.035);
      FAIL("expected a precondition error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Precondition);
    }
  }
  SUBCASE("short non-looping content is a missing frame") {
    const auto once = CloudSequence::in_memory(frames, false);
    CHECK_THROWS_AS(derive_pr(tr, *once, FrustumParams{}, 0.035), Error);
  }
  SUBCASE("centroid mode measures to the content centroid") {
    const Trajectory c = derive_pr(tr, *clouds, FrustumParams{}, 0.035, RMode::Centroid);
    for (const auto& s : c.samples) {
      CHECK(*s.r == doctest::Approx(euclidean_distance(s.x, clouds->at(0)->centroid)));
    }
  }
}
