#include "sixdof/manifest.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <set>
#include <sstream>

#include "sixdof/error.hpp"

namespace sixdof {

using nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

Manifest::Manifest() {
  for (MetricId id : kProxyMetrics) metrics[id] = default_config(id);
}

const MetricConfig& Manifest::config(MetricId id) const {
  static const MetricConfig overlap = default_config(MetricId::Overlap);
  if (id == MetricId::Overlap) return overlap;
  return metrics.at(id);
}

namespace {

void check_object(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw Error(ErrorKind::Schema, fmt::format("{} must be an object", where));
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      throw Error(ErrorKind::Schema, fmt::format("unknown key '{}' in {}", key, where));
    }
  }
}

template <typename T>
T get(const json& j, const std::string& where, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::Schema, fmt::format("{}.{} has the wrong type", where, key));
  }
}

template <typename T>
T require(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::Schema, fmt::format("{} lacks '{}'", where, key));
  return get<T>(j, where, key, T{});
}

json parse_json(std::string_view text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, fmt::format("{}: {}", source, e.what()));
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path existing(const fs::path& base, const std::string& raw, const std::string& key) {
  fs::path p(raw);
  if (p.is_relative()) p = base / p;
  if (!fs::exists(p)) {
    throw Error(ErrorKind::Io, fmt::format("{} '{}' does not exist", key, p.string()));
  }
  return p;
}

ContentEntry parse_content(const json& j, const fs::path& base, const std::string& where) {
  ContentEntry c;
  c.content_id = require<std::string>(j, where, "content_id");
  c.cloud_dir = existing(base, require<std::string>(j, where, "cloud_dir"), "cloud_dir");
  c.trajectory_csv =
      existing(base, require<std::string>(j, where, "trajectory_csv"), "trajectory_csv");
  c.fps = get<double>(j, where, "fps", 30.0);
  c.reference = get<bool>(j, where, "reference", true);
  c.loop_content = get<bool>(j, where, "loop_content", false);
  if (!(c.fps > 0.0)) throw Error(ErrorKind::Schema, fmt::format("{}.fps must be > 0", where));
  return c;
}

void parse_regulators(const json& j, const std::string& where, MetricConfig& cfg) {
  check_object(j, where, {"alpha", "beta", "gamma", "threshold"});
  cfg.regulators.alpha = get<double>(j, where, "alpha", cfg.regulators.alpha);
  cfg.regulators.beta = get<double>(j, where, "beta", cfg.regulators.beta);
  cfg.regulators.gamma = get<double>(j, where, "gamma", cfg.regulators.gamma);
  cfg.threshold = get<double>(j, where, "threshold", cfg.threshold);
  try {
    cfg.regulators.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Schema, fmt::format("{}: {}", where, e.what()));
  }
}

FrustumParams parse_frustum(const json& j, FrustumParams f) {
  check_object(j, "frustum", {"hfov", "vfov", "near", "far"});
  f.hfov = get<double>(j, "frustum", "hfov", f.hfov);
  f.vfov = get<double>(j, "frustum", "vfov", f.vfov);
  f.near = get<double>(j, "frustum", "near", f.near);
  f.far = get<double>(j, "frustum", "far", f.far);
  try {
    f.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Schema, fmt::format("frustum: {}", e.what()));
  }
  return f;
}

MetricId metric_key(const std::string& key, const std::string& where) {
  auto id = parse_metric(key);
  if (!id || *id == MetricId::Overlap) {
    throw Error(ErrorKind::Schema, fmt::format("unknown metric '{}' in {}", key, where));
  }
  return *id;
}

}  // namespace

Manifest parse_manifest(std::string_view text, const fs::path& base_dir) {
  const json j = parse_json(text, "manifest");
  check_object(j, "manifest",
               {"content_id", "cloud_dir", "trajectory_csv", "fps", "reference", "loop_content",
                "contents", "frustum", "cone_half_angle", "r_mode", "relevant_min_size",
                "overlap_threshold", "target_tpr", "graph_k", "metrics", "chunk"});
  Manifest m;
  const bool single = j.contains("content_id") || j.contains("cloud_dir") ||
                      j.contains("trajectory_csv");
  if (single && j.contains("contents")) {
    throw Error(ErrorKind::Schema, "manifest mixes top-level content fields with 'contents'");
  }
  if (single) {
    m.contents.push_back(parse_content(j, base_dir, "manifest"));
  } else if (j.contains("contents")) {
    if (j.contains("fps") || j.contains("reference") || j.contains("loop_content")) {
      throw Error(ErrorKind::Schema, "per-content keys belong inside 'contents'");
    }
    const json& list = j.at("contents");
    if (!list.is_array() || list.empty()) {
      throw Error(ErrorKind::Schema, "'contents' must be a non-empty array");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = fmt::format("contents[{}]", i);
      check_object(list[i], where,
                   {"content_id", "cloud_dir", "trajectory_csv", "fps", "reference",
                    "loop_content"});
      m.contents.push_back(parse_content(list[i], base_dir, where));
    }
  } else {
    throw Error(ErrorKind::Schema, "manifest names no content");
  }
  std::set<std::string> ids;
  for (const auto& c : m.contents) {
    if (!ids.insert(c.content_id).second) {
      throw Error(ErrorKind::Schema, fmt::format("duplicate content_id '{}'", c.content_id));
    }
  }

  if (j.contains("frustum")) m.frustum = parse_frustum(j.at("frustum"), m.frustum);
  m.cone_half_angle = get<double>(j, "manifest", "cone_half_angle", m.cone_half_angle);
  if (!(m.cone_half_angle > 0.0 && m.cone_half_angle <= std::numbers::pi / 4)) {
    throw Error(ErrorKind::Schema, "cone_half_angle must be in (0, pi/4]");
  }
  const auto r_mode = get<std::string>(j, "manifest", "r_mode", "viewport");
  if (r_mode == "viewport") {
    m.r_mode = RMode::ViewportCentre;
  } else if (r_mode == "centroid") {
    m.r_mode = RMode::Centroid;
  } else {
    throw Error(ErrorKind::Schema, fmt::format("r_mode must be viewport or centroid, got '{}'",
                                               r_mode));
  }
  const auto min_size = get<long long>(j, "manifest", "relevant_min_size", 3);
  if (min_size < 1) throw Error(ErrorKind::Schema, "relevant_min_size must be >= 1");
  m.relevant_min_size = static_cast<std::size_t>(min_size);
  m.overlap_threshold = get<double>(j, "manifest", "overlap_threshold", m.overlap_threshold);
  m.target_tpr = get<double>(j, "manifest", "target_tpr", m.target_tpr);
  m.graph_k = get<int>(j, "manifest", "graph_k", m.graph_k);
  if (m.graph_k < 1) throw Error(ErrorKind::Schema, "graph_k must be >= 1");
  if (!(m.overlap_threshold >= 0.0 && m.overlap_threshold <= 1.0)) {
    throw Error(ErrorKind::Schema, "overlap_threshold must be in [0, 1]");
  }
  if (!(m.target_tpr >= 0.0 && m.target_tpr <= 1.0)) {
    throw Error(ErrorKind::Schema, "target_tpr must be in [0, 1]");
  }

  if (j.contains("metrics")) {
    const json& metrics = j.at("metrics");
    if (!metrics.is_object()) throw Error(ErrorKind::Schema, "metrics must be an object");
    for (const auto& [key, value] : metrics.items()) {
      const MetricId id = metric_key(key, "metrics");
      parse_regulators(value, "metrics." + key, m.metrics[id]);
    }
  }
  if (j.contains("chunk")) {
    const json& c = j.at("chunk");
    check_object(c, "chunk", {"window", "persistence"});
    m.chunk.window = get<double>(c, "chunk", "window", m.chunk.window);
    m.chunk.persistence = get<double>(c, "chunk", "persistence", m.chunk.persistence);
    try {
      m.chunk.validate();
    } catch (const Error& e) {
      throw Error(ErrorKind::Schema, fmt::format("chunk: {}", e.what()));
    }
  }
  return m;
}

Manifest load_manifest(const fs::path& path) {
  if (!fs::exists(path)) {
    throw Error(ErrorKind::Io, fmt::format("manifest '{}' does not exist", path.string()));
  }
  return parse_manifest(read_file(path), path.parent_path());
}

void write_manifest(std::ostream& out, const Manifest& m) {
  ojson j;
  auto& list = j["contents"] = ojson::array();
  for (const auto& c : m.contents) {
    list.push_back({{"content_id", c.content_id},
                    {"cloud_dir", c.cloud_dir.generic_string()},
                    {"trajectory_csv", c.trajectory_csv.generic_string()},
                    {"fps", c.fps},
                    {"reference", c.reference},
                    {"loop_content", c.loop_content}});
  }
  j["frustum"] = {{"hfov", m.frustum.hfov},
                  {"vfov", m.frustum.vfov},
                  {"near", m.frustum.near},
                  {"far", m.frustum.far}};
  j["cone_half_angle"] = m.cone_half_angle;
  j["r_mode"] = m.r_mode == RMode::Centroid ? "centroid" : "viewport";
  j["relevant_min_size"] = m.relevant_min_size;
  j["overlap_threshold"] = m.overlap_threshold;
  j["target_tpr"] = m.target_tpr;
  j["graph_k"] = m.graph_k;
  auto& metrics = j["metrics"] = ojson::object();
  for (const auto& [id, cfg] : m.metrics) {
    metrics[std::string(to_string(id))] = {{"alpha", cfg.regulators.alpha},
                                           {"beta", cfg.regulators.beta},
                                           {"gamma", cfg.regulators.gamma},
                                           {"threshold", cfg.threshold}};
  }
  j["chunk"] = {{"window", m.chunk.window}, {"persistence", m.chunk.persistence}};
  out << j.dump(2) << '\n';
}

SessionDataset load_dataset(const Manifest& manifest, const ContentEntry& entry) {
  SessionDataset ds;
  ds.content_id = entry.content_id;
  ds.fps = entry.fps;
  ds.reference = entry.reference;
  ds.clouds = CloudSequence::from_directory(entry.cloud_dir, entry.loop_content);
  const auto aligned = align_to_frames(load_trajectories(entry.trajectory_csv), entry.fps);
  const bool precomputed = std::any_of(aligned.begin(), aligned.end(), [](const Trajectory& t) {
    return std::any_of(t.samples.begin(), t.samples.end(),
                       [](const TrajectorySample& s) { return s.p.has_value(); });
  });
  if (!precomputed) {
    ds.trajectories = derive_pr(aligned, *ds.clouds, manifest.frustum, manifest.cone_half_angle,
                                manifest.r_mode);
    return ds;
  }
  ds.trajectories = aligned;
  if (manifest.r_mode == RMode::Centroid) {
    for (auto& t : ds.trajectories) {
      for (auto& s : t.samples) {
        if (s.on_content()) s.r = euclidean_distance(s.x, ds.clouds->at(s.frame)->centroid);
      }
    }
  }
  return ds;
}

void write_calibration_json(std::ostream& out, const CalibrationFile& c) {
  ojson j;
  j["target_tpr"] = c.target_tpr;
  j["overlap_threshold"] = c.overlap_threshold;
  auto& metrics = j["metrics"] = ojson::object();
  for (const auto& [id, cfg] : c.metrics) {
    ojson item = {{"alpha", cfg.regulators.alpha},
                  {"beta", cfg.regulators.beta},
                  {"gamma", cfg.regulators.gamma},
                  {"threshold", cfg.threshold}};
    if (auto it = c.achieved.find(id); it != c.achieved.end()) {
      item["tpr"] = it->second.tpr;
      item["fpr"] = it->second.fpr;
    }
    metrics[std::string(to_string(id))] = std::move(item);
  }
  out << j.dump(2) << '\n';
}

CalibrationFile load_calibration(const fs::path& path) {
  const json j = parse_json(read_file(path), path.string());
  check_object(j, "calibration", {"target_tpr", "overlap_threshold", "metrics"});
  CalibrationFile c;
  c.target_tpr = get<double>(j, "calibration", "target_tpr", c.target_tpr);
  c.overlap_threshold = get<double>(j, "calibration", "overlap_threshold", c.overlap_threshold);
  if (j.contains("metrics")) {
    if (!j.at("metrics").is_object()) throw Error(ErrorKind::Schema, "metrics must be an object");
    for (const auto& [key, value] : j.at("metrics").items()) {
      const MetricId id = metric_key(key, "calibration metrics");
      const std::string where = "calibration.metrics." + key;
      check_object(value, where, {"alpha", "beta", "gamma", "threshold", "tpr", "fpr"});
      MetricConfig cfg = default_config(id);
      json regs = value;
      regs.erase("tpr");
      regs.erase("fpr");
      parse_regulators(regs, where, cfg);
      c.metrics[id] = cfg;
      if (value.contains("tpr") && value.contains("fpr")) {
        c.achieved[id] = {cfg.threshold, get<double>(value, where, "tpr", 0.0),
                          get<double>(value, where, "fpr", 0.0)};
      }
    }
  }
  return c;
}

void apply_calibration(Manifest& manifest, const CalibrationFile& calibration) {
  for (const auto& [id, cfg] : calibration.metrics) manifest.metrics[id] = cfg;
  // thresholds only mean something under the labels they were fitted to
  manifest.overlap_threshold = calibration.overlap_threshold;
  manifest.target_tpr = calibration.target_tpr;
}

namespace {

ojson point_json(Point3 p) { return ojson::array({p.x, p.y, p.z}); }

Point3 point_of(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number()) {
    throw Error(ErrorKind::Schema, fmt::format("{} must be [x, y, z]", where));
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

GroupSpec parse_group(const json& j, const std::string& where) {
  check_object(j, where, {"size", "motion", "gaze", "position_jitter"});
  GroupSpec g;
  g.size = get<std::size_t>(j, where, "size", 1);
  g.position_jitter = get<double>(j, where, "position_jitter", 0.0);
  if (j.contains("motion")) {
    const json& m = j.at("motion");
    const std::string mw = where + ".motion";
    const auto type = m.is_object() ? get<std::string>(m, mw, "type", "") : "";
    if (type == "orbit") {
      check_object(m, mw, {"type", "radius", "angular_speed", "phase"});
      g.motion = Orbit{get<double>(m, mw, "radius", 2.0), get<double>(m, mw, "angular_speed", 0.0),
                       get<double>(m, mw, "phase", 0.0)};
    } else if (type == "static") {
      check_object(m, mw, {"type", "position"});
      g.motion = Static{m.contains("position") ? point_of(m.at("position"), mw + ".position")
                                               : Static{}.position};
    } else if (type == "random_walk") {
      check_object(m, mw, {"type", "start", "step_sigma"});
      g.motion = RandomWalk{
          m.contains("start") ? point_of(m.at("start"), mw + ".start") : RandomWalk{}.start,
          get<double>(m, mw, "step_sigma", 0.01)};
    } else {
      throw Error(ErrorKind::Schema,
                  fmt::format("{}.type must be orbit, static or random_walk", mw));
    }
  }
  if (j.contains("gaze")) {
    const json& gz = j.at("gaze");
    const std::string gw = where + ".gaze";
    const auto type = gz.is_object() ? get<std::string>(gz, gw, "type", "") : "";
    if (type == "at-centroid") {
      check_object(gz, gw, {"type"});
      g.gaze = GazeAtCentroid{};
    } else if (type == "fixed") {
      check_object(gz, gw, {"type", "direction"});
      g.gaze = GazeFixed{point_of(gz.at("direction"), gw + ".direction")};
    } else if (type == "jittered") {
      check_object(gz, gw, {"type", "sigma"});
      g.gaze = GazeJittered{get<double>(gz, gw, "sigma", 0.02)};
    } else {
      throw Error(ErrorKind::Schema,
                  fmt::format("{}.type must be at-centroid, fixed or jittered", gw));
    }
  }
  return g;
}

}  // namespace

SynthScenario parse_scenario(std::string_view text) {
  const json j = parse_json(text, "scenario");
  check_object(j, "scenario",
               {"seed", "cloud_kind", "points_per_frame", "n_frames", "fps", "groups",
                "eye_height", "frustum", "preset"});
  SynthScenario s;
  if (j.contains("preset")) {
    const auto preset = get<std::string>(j, "scenario", "preset", "");
    if (preset != "planted-orbits") {
      throw Error(ErrorKind::Schema, fmt::format("unknown preset '{}'", preset));
    }
    s = planted_orbit_scenario();
  }
  s.seed = get<std::uint64_t>(j, "scenario", "seed", s.seed);
  if (j.contains("cloud_kind")) {
    const auto kind = parse_cloud_kind(get<std::string>(j, "scenario", "cloud_kind", ""));
    if (!kind) throw Error(ErrorKind::Schema, "cloud_kind must be sphere, cylinder or humanoid-blocks");
    s.cloud_kind = *kind;
  }
  s.points_per_frame = get<std::size_t>(j, "scenario", "points_per_frame", s.points_per_frame);
  s.n_frames = get<std::size_t>(j, "scenario", "n_frames", s.n_frames);
  s.fps = get<double>(j, "scenario", "fps", s.fps);
  s.eye_height = get<double>(j, "scenario", "eye_height", s.eye_height);
  if (j.contains("frustum")) s.frustum = parse_frustum(j.at("frustum"), s.frustum);
  if (j.contains("groups")) {
    const json& groups = j.at("groups");
    if (!groups.is_array()) throw Error(ErrorKind::Schema, "groups must be an array");
    s.groups.clear();
    for (std::size_t i = 0; i < groups.size(); ++i) {
      s.groups.push_back(parse_group(groups[i], fmt::format("groups[{}]", i)));
    }
  }
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Schema, fmt::format("scenario: {}", e.what()));
  }
  return s;
}

std::string scenario_to_json(const SynthScenario& s) {
  ojson j;
  j["seed"] = s.seed;
  j["cloud_kind"] = std::string(to_string(s.cloud_kind));
  j["points_per_frame"] = s.points_per_frame;
  j["n_frames"] = s.n_frames;
  j["fps"] = s.fps;
  j["eye_height"] = s.eye_height;
  j["frustum"] = {{"hfov", s.frustum.hfov},
                  {"vfov", s.frustum.vfov},
                  {"near", s.frustum.near},
                  {"far", s.frustum.far}};
  auto& groups = j["groups"] = ojson::array();
  for (const auto& g : s.groups) {
    ojson item;
    item["size"] = g.size;
    item["position_jitter"] = g.position_jitter;
    if (const auto* o = std::get_if<Orbit>(&g.motion)) {
      item["motion"] = {{"type", "orbit"},
                        {"radius", o->radius},
                        {"angular_speed", o->angular_speed},
                        {"phase", o->phase}};
    } else if (const auto* st = std::get_if<Static>(&g.motion)) {
      item["motion"] = {{"type", "static"}, {"position", point_json(st->position)}};
    } else {
      const auto& w = std::get<RandomWalk>(g.motion);
      item["motion"] = {{"type", "random_walk"},
                        {"start", point_json(w.start)},
                        {"step_sigma", w.step_sigma}};
    }
    if (std::holds_alternative<GazeAtCentroid>(g.gaze)) {
      item["gaze"] = {{"type", "at-centroid"}};
    } else if (const auto* f = std::get_if<GazeFixed>(&g.gaze)) {
      item["gaze"] = {{"type", "fixed"}, {"direction", point_json(f->direction)}};
    } else {
      item["gaze"] = {{"type", "jittered"}, {"sigma", std::get<GazeJittered>(g.gaze).sigma}};
    }
    groups.push_back(std::move(item));
  }
  return j.dump(2) + "\n";
}

}  // namespace sixdof
