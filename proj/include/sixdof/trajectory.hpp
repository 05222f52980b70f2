#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sixdof/cloud_sequence.hpp"
#include "sixdof/geometry.hpp"

namespace sixdof {

struct TrajectorySample {
  double t = 0.0;
  std::int64_t frame = -1;  // content frame; -1 until aligned
  Point3 x;                 // user position
  Quaternion orientation;
  std::optional<Point3> p;  // viewport centre on the content
  std::optional<double> r;  // user-to-content distance
  bool off_content = true;  // no p/r for this sample
  bool gap = false;         // no capture within half a frame period of this frame

  Pose pose() const { return {x, orientation}; }
  Direction view() const { return pose().forward(); }
  bool on_content() const { return !off_content && !gap; }

  friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

struct Trajectory {
  std::string user_id;
  std::vector<TrajectorySample> samples;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// How r is measured once p is known.
enum class RMode { ViewportCentre, Centroid };

struct SessionDataset {
  std::string content_id;
  double fps = 30.0;
  std::vector<Trajectory> trajectories;  // aligned, sorted by user_id
  std::shared_ptr<const CloudSequence> clouds;
  bool reference = true;  // undistorted stimulus; used for ablation set selection

  std::size_t user_count() const { return trajectories.size(); }
  std::size_t frame_count() const {
    return trajectories.empty() ? 0 : trajectories.front().samples.size();
  }
};

enum class TrajectorySchema {
  Auto,        // precomputed columns used when present in the header
  Pose,        // user_id,t,pos_*,quat_*
  PoseWithPr,  // ... plus p_x,p_y,p_z,r
};

// CSV ingestion. Users come back sorted by id, samples by time.
// Throws Parse (with line number) or Schema.
std::vector<Trajectory> load_trajectories(const std::filesystem::path& path,
                                          TrajectorySchema schema = TrajectorySchema::Auto);
std::vector<Trajectory> parse_trajectories(std::istream& in, std::string_view source,
                                           TrajectorySchema schema = TrajectorySchema::Auto);

// Writes raw captures (gap samples are skipped). p/r columns are emitted when
// any sample carries them; off-content rows leave those cells empty.
void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajectories);
void write_trajectories(const std::filesystem::path& path,
                        const std::vector<Trajectory>& trajectories);

// One sample per content frame (nearest capture in time), all trajectories
// padded to a common frame count. Frames with no capture within half a frame
// period become gap samples. Throws EmptyTrajectory.
std::vector<Trajectory> align_to_frames(const std::vector<Trajectory>& raw, double fps);

// Fills p and r by casting the gaze onto each frame's cloud. Hits outside
// [near, far] or outside the cone leave the sample off-content.
// Throws Precondition if p/r are already present or the trajectory is not
// aligned, MissingFrame if the clouds do not cover it.
Trajectory derive_pr(const Trajectory& traj, const CloudSequence& clouds,
                     const FrustumParams& params, double cone_half_angle,
                     RMode r_mode = RMode::ViewportCentre);

// Same for every user, reading each content frame once.
std::vector<Trajectory> derive_pr(const std::vector<Trajectory>& trajs, const CloudSequence& clouds,
                                  const FrustumParams& params, double cone_half_angle,
                                  RMode r_mode = RMode::ViewportCentre);

}  // namespace sixdof
