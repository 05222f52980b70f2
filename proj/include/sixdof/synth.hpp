#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "sixdof/clustering.hpp"
#include "sixdof/geometry.hpp"
#include "sixdof/trajectory.hpp"

namespace sixdof {

// splitmix64; fully specified so outputs match across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();  // [0, 1)
  double normal();   // standard normal, Box-Muller

 private:
  std::uint64_t state_;
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

enum class CloudKind { Sphere, Cylinder, HumanoidBlocks };

struct Orbit {
  double radius = 2.0;
  double angular_speed = 0.0;  // rad/s
  double phase = 0.0;
};
struct Static {
  Point3 position{0.0, 0.0, 2.0};
};
struct RandomWalk {
  Point3 start{0.0, 0.0, 2.0};
  double step_sigma = 0.01;  // metres per frame
};
using Motion = std::variant<Orbit, Static, RandomWalk>;

struct GazeAtCentroid {};
struct GazeFixed {
  Point3 direction{0.0, 0.0, -1.0};
};
struct GazeJittered {
  double sigma = 0.02;  // radians, around the centroid direction
};
using Gaze = std::variant<GazeAtCentroid, GazeFixed, GazeJittered>;

struct GroupSpec {
  std::size_t size = 1;
  Motion motion = Orbit{};
  Gaze gaze = GazeAtCentroid{};
  double position_jitter = 0.0;  // per-user constant offset, metres (std)
};

// Content is centred on the origin, 1.8 m tall, y up. Users move at
// `eye_height` relative to that centre.
struct SynthScenario {
  std::uint64_t seed = 0;
  CloudKind cloud_kind = CloudKind::Sphere;
  std::size_t points_per_frame = 2000;
  std::size_t n_frames = 300;
  double fps = 30.0;
  std::vector<GroupSpec> groups;
  double eye_height = 0.0;
  FrustumParams frustum;  // viewing frustum used with this scenario

  void validate() const;  // InvalidParams
  std::size_t user_count() const;
};

inline constexpr double kContentHeight = 1.8;

std::string_view to_string(CloudKind kind);
std::optional<CloudKind> parse_cloud_kind(std::string_view name);

// Sphere and cylinder are static: every frame is identical.
bool is_static(CloudKind kind);
PointCloudFrame generate_cloud_frame(const SynthScenario& scenario, std::size_t frame);
std::vector<PointCloudFrame> generate_cloud(const SynthScenario& scenario);

// Raw captures at t = f / fps, without viewport centres.
std::vector<Trajectory> generate_trajectories(const SynthScenario& scenario);

std::string synth_user_id(std::size_t index);  // "u000"

// Group index per user, in user order; constant over time.
std::vector<std::size_t> planted_labels(const SynthScenario& scenario);
ClusteringResult planted_partition(const SynthScenario& scenario);

// Cluster index per user.
std::vector<std::size_t> labels_of(const ClusteringResult& result);
double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

// Three orbit groups of four users, 120 degrees apart at radius 2, 10 s at 30 fps.
SynthScenario planted_orbit_scenario(std::uint64_t seed = 0);

// Aligned dataset with viewport centres derived from the scenario frustum.
SessionDataset make_dataset(const SynthScenario& scenario, double cone_half_angle = 0.035,
                            RMode r_mode = RMode::ViewportCentre);

}  // namespace sixdof
