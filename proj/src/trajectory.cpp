#include "sixdof/trajectory.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "sixdof/csv.hpp"
#include "sixdof/error.hpp"

namespace sixdof {
namespace {

constexpr std::array<std::string_view, 9> kPoseColumns = {
    "user_id", "t", "pos_x", "pos_y", "pos_z", "quat_w", "quat_x", "quat_y", "quat_z"};
constexpr std::array<std::string_view, 4> kPrColumns = {"p_x", "p_y", "p_z", "r"};

[[noreturn]] void parse_fail(std::string_view source, std::size_t line, const std::string& msg) {
  throw Error(ErrorKind::Parse, fmt::format("{}:{}: {}", source, line, msg));
}

}  // namespace

std::vector<Trajectory> parse_trajectories(std::istream& in, std::string_view source,
                                           TrajectorySchema schema) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::Schema, fmt::format("{}: missing header row", source));
  }
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  const auto header = csv::split(line);
  std::map<std::string, std::size_t, std::less<>> column;
  for (std::size_t i = 0; i < header.size(); ++i) column.emplace(header[i], i);

  auto require = [&](std::string_view name) {
    auto it = column.find(name);
    if (it == column.end()) {
      throw Error(ErrorKind::Schema, fmt::format("{}: missing column '{}'", source, name));
    }
    return it->second;
  };

  std::array<std::size_t, 9> pose_idx{};
  for (std::size_t i = 0; i < kPoseColumns.size(); ++i) pose_idx[i] = require(kPoseColumns[i]);

  const bool any_pr = std::any_of(kPrColumns.begin(), kPrColumns.end(),
                                  [&](std::string_view c) { return column.contains(c); });
  bool with_pr = false;
  if (schema == TrajectorySchema::PoseWithPr || (schema == TrajectorySchema::Auto && any_pr)) {
    with_pr = true;
  }
  std::array<std::size_t, 4> pr_idx{};
  if (with_pr) {
    for (std::size_t i = 0; i < kPrColumns.size(); ++i) pr_idx[i] = require(kPrColumns[i]);
  }

  std::map<std::string, Trajectory> by_user;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = csv::split(line);
    if (fields.size() != header.size()) {
      parse_fail(source, line_no,
                 fmt::format("expected {} fields, found {}", header.size(), fields.size()));
    }
    const std::string& user = fields[pose_idx[0]];
    if (user.empty()) parse_fail(source, line_no, "empty user_id");

    std::array<double, 8> v{};
    for (std::size_t i = 1; i < kPoseColumns.size(); ++i) {
      auto d = csv::to_double(fields[pose_idx[i]]);
      if (!d) parse_fail(source, line_no, fmt::format("malformed {}", kPoseColumns[i]));
      if (!std::isfinite(*d)) parse_fail(source, line_no, fmt::format("non-finite {}", kPoseColumns[i]));
      v[i - 1] = *d;
    }
    TrajectorySample s;
    s.t = v[0];
    if (s.t < 0.0) parse_fail(source, line_no, "negative timestamp");
    s.x = {v[1], v[2], v[3]};
    const Quaternion q{v[4], v[5], v[6], v[7]};
    if (q.norm() < 1e-9) parse_fail(source, line_no, "zero quaternion");
    s.orientation = q.normalized();

    if (with_pr) {
      std::array<std::optional<double>, 4> pr;
      std::size_t present = 0;
      for (std::size_t i = 0; i < 4; ++i) {
        const std::string& f = fields[pr_idx[i]];
        if (f.empty()) continue;
        pr[i] = csv::to_double(f);
        if (!pr[i]) parse_fail(source, line_no, fmt::format("malformed {}", kPrColumns[i]));
        if (!std::isfinite(*pr[i])) parse_fail(source, line_no, fmt::format("non-finite {}", kPrColumns[i]));
        ++present;
      }
      if (present != 0 && present != 4) {
        parse_fail(source, line_no, "p_x,p_y,p_z,r must be all present or all empty");
      }
      if (present == 4) {
        if (*pr[3] < 0.0) parse_fail(source, line_no, "negative r");
        s.p = Point3{*pr[0], *pr[1], *pr[2]};
        s.r = *pr[3];
        s.off_content = false;
      }
    }

    auto& traj = by_user[user];
    traj.user_id = user;
    traj.samples.push_back(s);
  }

  std::vector<Trajectory> out;
  out.reserve(by_user.size());
  for (auto& [user, traj] : by_user) {
    std::stable_sort(traj.samples.begin(), traj.samples.end(),
                     [](const TrajectorySample& a, const TrajectorySample& b) { return a.t < b.t; });
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
      if (traj.samples[i].t == traj.samples[i - 1].t) {
        throw Error(ErrorKind::Parse, fmt::format("{}: user '{}' has duplicate timestamp {}",
                                                  source, user, traj.samples[i].t));
      }
    }
    out.push_back(std::move(traj));
  }
  return out;
}

std::vector<Trajectory> load_trajectories(const std::filesystem::path& path,
                                          TrajectorySchema schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open trajectory file '{}'", path.string()));
  return parse_trajectories(in, path.string(), schema);
}

void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajectories) {
  bool with_pr = false;
  for (const auto& tr : trajectories) {
    for (const auto& s : tr.samples) with_pr = with_pr || s.p.has_value();
  }
  out << "user_id,t,pos_x,pos_y,pos_z,quat_w,quat_x,quat_y,quat_z";
  if (with_pr) out << ",p_x,p_y,p_z,r";
  out << '\n';
  using csv::fmt_double;
  for (const auto& tr : trajectories) {
    for (const auto& s : tr.samples) {
      if (s.gap) continue;
      const Quaternion& q = s.orientation;
      out << fmt::format("{},{},{},{},{},{},{},{},{}", tr.user_id, fmt_double(s.t),
                         fmt_double(s.x.x), fmt_double(s.x.y), fmt_double(s.x.z), fmt_double(q.w),
                         fmt_double(q.x), fmt_double(q.y), fmt_double(q.z));
      if (with_pr) {
        if (s.p && s.r) {
          out << fmt::format(",{},{},{},{}", fmt_double(s.p->x), fmt_double(s.p->y),
                             fmt_double(s.p->z), fmt_double(*s.r));
        } else {
          out << ",,,,";
        }
      }
      out << '\n';
    }
  }
}

void write_trajectories(const std::filesystem::path& path,
                        const std::vector<Trajectory>& trajectories) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", path.string()));
  write_trajectories(out, trajectories);
}

std::vector<Trajectory> align_to_frames(const std::vector<Trajectory>& raw, double fps) {
  if (!(fps > 0.0) || !std::isfinite(fps)) {
    throw Error(ErrorKind::InvalidParams, fmt::format("fps must be positive, got {}", fps));
  }
  std::int64_t frames = 0;
  for (const auto& tr : raw) {
    if (tr.samples.empty()) {
      throw Error(ErrorKind::EmptyTrajectory, fmt::format("trajectory '{}' has no samples", tr.user_id));
    }
    const auto last = static_cast<std::int64_t>(std::llround(tr.samples.back().t * fps));
    frames = std::max(frames, last + 1);
  }

  const double half_period = 0.5 / fps;
  std::vector<Trajectory> out;
  out.reserve(raw.size());
  for (const auto& tr : raw) {
    Trajectory aligned{tr.user_id, {}};
    aligned.samples.reserve(static_cast<std::size_t>(frames));
    const auto& s = tr.samples;
    for (std::int64_t f = 0; f < frames; ++f) {
      const double tf = static_cast<double>(f) / fps;
      auto it = std::lower_bound(s.begin(), s.end(), tf,
                                 [](const TrajectorySample& a, double t) { return a.t < t; });
      // Nearest in time; the earlier sample wins ties.
      auto best = it;
      if (it == s.end()) {
        best = std::prev(it);
      } else if (it != s.begin()) {
        auto before = std::prev(it);
        if (tf - before->t <= it->t - tf) best = before;
      }
      TrajectorySample sample = *best;
      sample.t = tf;
      sample.frame = f;
      if (std::abs(best->t - tf) > half_period + 1e-12) {
        sample.gap = true;
        sample.off_content = true;
        sample.p.reset();
        sample.r.reset();
      }
      aligned.samples.push_back(sample);
    }
    out.push_back(std::move(aligned));
  }
  return out;
}

namespace {

void check_derivable(const Trajectory& traj) {
  for (const auto& s : traj.samples) {
    if (s.p || s.r) {
      throw Error(ErrorKind::Precondition,
                  fmt::format("trajectory '{}' already carries p/r", traj.user_id));
    }
    if (s.frame < 0) {
      throw Error(ErrorKind::Precondition,
                  fmt::format("trajectory '{}' is not aligned to frames", traj.user_id));
    }
  }
}

void project_sample(TrajectorySample& s, const PointCloudFrame& cloud, const FrustumParams& params,
                    double cone, RMode r_mode) {
  s.p.reset();
  s.r.reset();
  s.off_content = true;
  if (s.gap) return;
  const auto hit = ray_cast_center(s.pose(), cloud, cone);
  if (!hit) return;
  const double along = dot(hit->p - s.x, s.view().vec());
  if (along < params.near || along > params.far) return;
  s.p = hit->p;
  s.r = r_mode == RMode::ViewportCentre ? hit->r : euclidean_distance(s.x, cloud.centroid);
  s.off_content = false;
}

}  // namespace

Trajectory derive_pr(const Trajectory& traj, const CloudSequence& clouds,
                     const FrustumParams& params, double cone_half_angle, RMode r_mode) {
  return derive_pr(std::vector<Trajectory>{traj}, clouds, params, cone_half_angle, r_mode).front();
}

std::vector<Trajectory> derive_pr(const std::vector<Trajectory>& trajs, const CloudSequence& clouds,
                                  const FrustumParams& params, double cone_half_angle,
                                  RMode r_mode) {
  params.validate();
  std::int64_t frames = 0;
  for (const auto& tr : trajs) {
    check_derivable(tr);
    for (const auto& s : tr.samples) frames = std::max(frames, s.frame + 1);
  }
  if (!clouds.loops() && frames > static_cast<std::int64_t>(clouds.size())) {
    throw Error(ErrorKind::MissingFrame,
                fmt::format("trajectories span {} frames but the content has {}", frames,
                            clouds.size()));
  }

  std::vector<Trajectory> out = trajs;
  // Samples grouped by frame so each cloud is fetched once.
  std::vector<std::vector<TrajectorySample*>> by_frame(static_cast<std::size_t>(frames));
  for (auto& tr : out) {
    for (auto& s : tr.samples) by_frame[static_cast<std::size_t>(s.frame)].push_back(&s);
  }
  for (std::int64_t f = 0; f < frames; ++f) {
    auto& bucket = by_frame[static_cast<std::size_t>(f)];
    if (bucket.empty()) continue;
    const CloudPtr cloud = clouds.at(f);
    for (TrajectorySample* s : bucket) project_sample(*s, *cloud, params, cone_half_angle, r_mode);
  }
  return out;
}

}  // namespace sixdof
