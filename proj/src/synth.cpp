#include "sixdof/synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

#include "sixdof/error.hpp"

namespace sixdof {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  SplitMix64 m(seed ^ (a * 0xD1B54A32D192ED03ull));
  m.next();
  SplitMix64 n(m.next() ^ (b * 0x8CB92BA72F3D8DD7ull));
  return n.next();
}

std::string_view to_string(CloudKind kind) {
  switch (kind) {
    case CloudKind::Sphere: return "sphere";
    case CloudKind::Cylinder: return "cylinder";
    case CloudKind::HumanoidBlocks: return "humanoid-blocks";
  }
  return "?";
}

std::optional<CloudKind> parse_cloud_kind(std::string_view name) {
  for (CloudKind k : {CloudKind::Sphere, CloudKind::Cylinder, CloudKind::HumanoidBlocks}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

bool is_static(CloudKind kind) { return kind != CloudKind::HumanoidBlocks; }

void SynthScenario::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidParams, what); };
  if (points_per_frame == 0) bad("points_per_frame must be >= 1");
  if (n_frames == 0) bad("n_frames must be >= 1");
  if (!(fps > 0.0) || !std::isfinite(fps)) bad("fps must be > 0");
  if (groups.empty()) bad("scenario needs at least one group");
  if (!std::isfinite(eye_height)) bad("eye_height must be finite");
  frustum.validate();
  for (const auto& g : groups) {
    if (g.size < 1) bad("group size must be >= 1");
    if (!(g.position_jitter >= 0.0)) bad("position_jitter must be >= 0");
    if (const auto* o = std::get_if<Orbit>(&g.motion)) {
      if (!(o->radius > 0.0)) bad("orbit radius must be > 0");
    }
    if (const auto* w = std::get_if<RandomWalk>(&g.motion)) {
      if (!(w->step_sigma >= 0.0)) bad("step_sigma must be >= 0");
    }
    if (const auto* j = std::get_if<GazeJittered>(&g.gaze)) {
      if (!(j->sigma >= 0.0)) bad("gaze sigma must be >= 0");
    }
  }
}

std::size_t SynthScenario::user_count() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size;
  return n;
}

namespace {

constexpr double kGoldenAngle = 2.399963229728653;  // pi (3 - sqrt 5)

// Stored as float so PLY output reads back bit-identical.
Point3 quantize(Point3 p) {
  return {static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z)};
}

std::vector<Point3> sphere_points(std::size_t n) {
  const double radius = kContentHeight / 2.0;
  std::vector<Point3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double ring = std::sqrt(std::max(0.0, 1.0 - y * y));
    const double th = kGoldenAngle * static_cast<double>(i);
    pts.push_back(quantize(radius * Point3{ring * std::cos(th), y, ring * std::sin(th)}));
  }
  return pts;
}

std::vector<Point3> cylinder_points(std::size_t n) {
  const double r = 0.3;
  const double h = kContentHeight;
  const double lateral = 2.0 * std::numbers::pi * r * h;
  const double caps = 2.0 * std::numbers::pi * r * r;
  const auto n_side = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::llround(static_cast<double>(n) * lateral / (lateral + caps))));
  const std::size_t n_caps = n - n_side;
  std::vector<Point3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n_side; ++i) {
    const double y = -h / 2 + h * (static_cast<double>(i) + 0.5) / static_cast<double>(n_side);
    const double th = kGoldenAngle * static_cast<double>(i);
    pts.push_back(quantize({r * std::cos(th), y, r * std::sin(th)}));
  }
  for (std::size_t i = 0; i < n_caps; ++i) {
    const std::size_t per_cap = (n_caps + 1) / 2;
    const std::size_t k = i % per_cap;
    const double y = i < per_cap ? h / 2 : -h / 2;
    const double rho = r * std::sqrt((static_cast<double>(k) + 0.5) / static_cast<double>(per_cap));
    const double th = kGoldenAngle * static_cast<double>(k);
    pts.push_back(quantize({rho * std::cos(th), y, rho * std::sin(th)}));
  }
  return pts;
}

struct Block {
  Point3 centre;
  Point3 half;
  int arm = 0;  // -1 left, +1 right, 0 rigid
};

// Head to feet spans [-0.9, 0.9].
const std::array<Block, 6> kBody = {{
    {{-0.1, -0.45, 0.0}, {0.08, 0.45, 0.08}, 0},
    {{0.1, -0.45, 0.0}, {0.08, 0.45, 0.08}, 0},
    {{0.0, 0.25, 0.0}, {0.2, 0.3, 0.12}, 0},
    {{0.0, 0.75, 0.0}, {0.1, 0.15, 0.1}, 0},
    {{-0.26, 0.25, 0.0}, {0.05, 0.3, 0.05}, -1},
    {{0.26, 0.25, 0.0}, {0.05, 0.3, 0.05}, 1},
}};

double box_area(const Block& b) {
  const Point3 h = b.half;
  return 8.0 * (h.x * h.y + h.y * h.z + h.x * h.z);
}

Point3 box_surface_point(const Block& b, SplitMix64& rng) {
  const Point3 h = b.half;
  const std::array<double, 3> face = {h.y * h.z, h.x * h.z, h.x * h.y};  // normal x, y, z
  const double pick = rng.uniform() * (face[0] + face[1] + face[2]);
  const int axis = pick < face[0] ? 0 : pick < face[0] + face[1] ? 1 : 2;
  const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  const double u = 2.0 * rng.uniform() - 1.0;
  const double v = 2.0 * rng.uniform() - 1.0;
  Point3 p;
  if (axis == 0) p = {sign * h.x, u * h.y, v * h.z};
  if (axis == 1) p = {u * h.x, sign * h.y, v * h.z};
  if (axis == 2) p = {u * h.x, v * h.y, sign * h.z};
  return b.centre + p;
}

std::vector<Point3> humanoid_points(std::size_t n, std::uint64_t seed, double t) {
  double total = 0.0;
  for (const auto& b : kBody) total += box_area(b);
  SplitMix64 rng(derive_seed(seed, 0x48554D41ull));  // same samples every frame
  const double swing = 0.5 * std::sin(std::numbers::pi * t);
  std::vector<Point3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double pick = rng.uniform() * total;
    std::size_t k = 0;
    while (k + 1 < kBody.size() && pick >= box_area(kBody[k])) pick -= box_area(kBody[k++]);
    const Block& b = kBody[k];
    Point3 p = box_surface_point(b, rng);
    if (b.arm != 0) {
      // Swing about the shoulder, arms in opposite phase.
      const Point3 shoulder{b.centre.x, b.centre.y + b.half.y, 0.0};
      const double a = b.arm * swing;
      const Point3 d = p - shoulder;
      p = shoulder + Point3{d.x, d.y * std::cos(a) - d.z * std::sin(a),
                            d.y * std::sin(a) + d.z * std::cos(a)};
    }
    pts.push_back(quantize(p));
  }
  return pts;
}

}  // namespace

PointCloudFrame generate_cloud_frame(const SynthScenario& scenario, std::size_t frame) {
  scenario.validate();
  const auto index = static_cast<std::int64_t>(frame);
  switch (scenario.cloud_kind) {
    case CloudKind::Sphere: return {index, sphere_points(scenario.points_per_frame)};
    case CloudKind::Cylinder: return {index, cylinder_points(scenario.points_per_frame)};
    case CloudKind::HumanoidBlocks:
      return {index, humanoid_points(scenario.points_per_frame, scenario.seed,
                                     static_cast<double>(frame) / scenario.fps)};
  }
  return {};
}

std::vector<PointCloudFrame> generate_cloud(const SynthScenario& scenario) {
  std::vector<PointCloudFrame> out;
  out.reserve(scenario.n_frames);
  for (std::size_t f = 0; f < scenario.n_frames; ++f) {
    out.push_back(generate_cloud_frame(scenario, f));
  }
  return out;
}

std::string synth_user_id(std::size_t index) { return fmt::format("u{:03}", index); }

namespace {

Point3 jitter_vector(SplitMix64& rng, double sigma) {
  const double x = rng.normal();
  const double y = rng.normal();
  const double z = rng.normal();
  return sigma * Point3{x, y, z};
}

Point3 gaze_direction(const Gaze& gaze, Point3 position, std::uint64_t seed) {
  Point3 to_centre = Point3{0.0, 0.0, 0.0} - position;
  if (norm(to_centre) < 1e-12) to_centre = {0.0, 0.0, -1.0};
  if (const auto* f = std::get_if<GazeFixed>(&gaze)) return f->direction;
  if (const auto* j = std::get_if<GazeJittered>(&gaze)) {
    SplitMix64 rng(seed);
    const double yaw = j->sigma * rng.normal();
    const double pitch = j->sigma * rng.normal();
    const Point3 up{0.0, 1.0, 0.0};
    Point3 right = cross(to_centre, up);
    if (norm(right) < 1e-12) right = {1.0, 0.0, 0.0};
    const Point3 d = Quaternion::from_axis_angle(up, yaw).rotate(to_centre);
    return Quaternion::from_axis_angle(right, pitch).rotate(d);
  }
  return to_centre;
}

}  // namespace

std::vector<Trajectory> generate_trajectories(const SynthScenario& scenario) {
  scenario.validate();
  std::vector<Trajectory> out;
  std::size_t user = 0;
  for (const auto& g : scenario.groups) {
    for (std::size_t k = 0; k < g.size; ++k, ++user) {
      Trajectory tr;
      tr.user_id = synth_user_id(user);
      SplitMix64 offset_rng(derive_seed(scenario.seed, 1, user));
      const Point3 offset = jitter_vector(offset_rng, g.position_jitter);
      SplitMix64 walk_rng(derive_seed(scenario.seed, 2, user));
      Point3 walk;
      if (const auto* w = std::get_if<RandomWalk>(&g.motion)) walk = w->start;
      for (std::size_t f = 0; f < scenario.n_frames; ++f) {
        const double t = static_cast<double>(f) / scenario.fps;
        Point3 x;
        if (const auto* o = std::get_if<Orbit>(&g.motion)) {
          const double a = o->phase + o->angular_speed * t;
          x = Point3{o->radius * std::sin(a), scenario.eye_height, o->radius * std::cos(a)};
        } else if (const auto* s = std::get_if<Static>(&g.motion)) {
          x = s->position;
        } else {
          const auto& w = std::get<RandomWalk>(g.motion);
          if (f > 0) walk = walk + jitter_vector(walk_rng, w.step_sigma);
          x = walk;
        }
        x = x + offset;
        const Point3 dir = gaze_direction(g.gaze, x, derive_seed(scenario.seed, 3 + user, f));
        TrajectorySample s;
        s.t = t;
        s.x = x;
        s.orientation = Quaternion::look_along(dir);
        tr.samples.push_back(s);
      }
      out.push_back(std::move(tr));
    }
  }
  return out;
}

std::vector<std::size_t> planted_labels(const SynthScenario& scenario) {
  std::vector<std::size_t> labels;
  for (std::size_t g = 0; g < scenario.groups.size(); ++g) {
    labels.insert(labels.end(), scenario.groups[g].size, g);
  }
  return labels;
}

ClusteringResult planted_partition(const SynthScenario& scenario) {
  ClusteringResult r;
  r.n = scenario.user_count();
  r.end_frame = 1;
  std::size_t user = 0;
  for (const auto& g : scenario.groups) {
    Cluster c;
    for (std::size_t k = 0; k < g.size; ++k) c.members.push_back(user++);
    c.relevant = c.size() >= kDefaultRelevantMinSize;
    r.clusters.push_back(std::move(c));
  }
  return r;
}

std::vector<std::size_t> labels_of(const ClusteringResult& result) {
  std::vector<std::size_t> labels(result.n, 0);
  for (std::size_t c = 0; c < result.clusters.size(); ++c) {
    for (std::size_t m : result.clusters[c].members) labels.at(m) = c;
  }
  return labels;
}

double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::InvalidParams, "label vectors differ in length");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  auto pairs = [](double c) { return c * (c - 1.0) / 2.0; };
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  std::map<std::size_t, double> ca, cb;
  for (std::size_t i = 0; i < n; ++i) {
    joint[{a[i], b[i]}] += 1.0;
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
  }
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [k, v] : joint) index += pairs(v);
  for (const auto& [k, v] : ca) sa += pairs(v);
  for (const auto& [k, v] : cb) sb += pairs(v);
  const double expected = sa * sb / pairs(static_cast<double>(n));
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;  // both partitions trivial and identical
  return (index - expected) / (max_index - expected);
}

SynthScenario planted_orbit_scenario(std::uint64_t seed) {
  SynthScenario s;
  s.seed = seed;
  s.cloud_kind = CloudKind::Sphere;
  s.points_per_frame = 4000;
  s.n_frames = 300;
  s.fps = 30.0;
  s.eye_height = 0.7;
  // With a 90 degree field of view the whole object fits in every frustum at
  // this range and O is 1 for everyone; 30 degrees separates the groups.
  s.frustum = FrustumParams{0.5236, 0.5236, 0.05, 100.0};
  for (int g = 0; g < 3; ++g) {
    GroupSpec spec;
    spec.size = 4;
    spec.motion = Orbit{2.0, 0.1, g * 2.0 * std::numbers::pi / 3.0};
    spec.gaze = GazeAtCentroid{};
    spec.position_jitter = 0.05;
    s.groups.push_back(spec);
  }
  return s;
}

SessionDataset make_dataset(const SynthScenario& scenario, double cone_half_angle, RMode r_mode) {
  scenario.validate();
  SessionDataset ds;
  ds.content_id = fmt::format("synth-{}-{}", to_string(scenario.cloud_kind), scenario.seed);
  ds.fps = scenario.fps;
  if (is_static(scenario.cloud_kind)) {
    ds.clouds = CloudSequence::in_memory({generate_cloud_frame(scenario, 0)}, true);
  } else {
    ds.clouds = CloudSequence::in_memory(generate_cloud(scenario));
  }
  const auto aligned = align_to_frames(generate_trajectories(scenario), scenario.fps);
  ds.trajectories = derive_pr(aligned, *ds.clouds, scenario.frustum, cone_half_angle, r_mode);
  return ds;
}

}  // namespace sixdof
