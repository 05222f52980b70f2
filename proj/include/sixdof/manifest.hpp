#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sixdof/calibration.hpp"
#include "sixdof/clustering.hpp"
#include "sixdof/metrics.hpp"
#include "sixdof/synth.hpp"
#include "sixdof/trajectory.hpp"

namespace sixdof {

struct ContentEntry {
  std::string content_id;
  std::filesystem::path cloud_dir;
  std::filesystem::path trajectory_csv;
  double fps = 30.0;
  bool reference = true;
  bool loop_content = false;  // trajectories longer than the content wrap around
};

struct Manifest {
  std::vector<ContentEntry> contents;
  FrustumParams frustum;
  double cone_half_angle = 0.035;
  RMode r_mode = RMode::ViewportCentre;
  std::size_t relevant_min_size = kDefaultRelevantMinSize;
  double overlap_threshold = kDefaultOverlapThreshold;
  double target_tpr = 0.75;
  int graph_k = 8;
  ChunkSpec chunk;
  std::map<MetricId, MetricConfig> metrics;  // all eight proxies

  Manifest();
  const MetricConfig& config(MetricId id) const;
};

// Relative paths resolve against `base_dir`. Unknown keys raise Schema,
// missing files raise Io.
Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);
void write_manifest(std::ostream& out, const Manifest& manifest);

// Loads, aligns and fills viewport centres for one content.
SessionDataset load_dataset(const Manifest& manifest, const ContentEntry& entry);

struct CalibrationFile {
  double target_tpr = 0.75;
  double overlap_threshold = kDefaultOverlapThreshold;
  std::map<MetricId, MetricConfig> metrics;
  std::map<MetricId, ThresholdChoice> achieved;
};

void write_calibration_json(std::ostream& out, const CalibrationFile& calibration);
CalibrationFile load_calibration(const std::filesystem::path& path);
// Overrides regulators and thresholds of the calibrated metrics, plus the
// O_th and target TPR they were fitted under.
void apply_calibration(Manifest& manifest, const CalibrationFile& calibration);

SynthScenario parse_scenario(std::string_view text);
std::string scenario_to_json(const SynthScenario& scenario);

}  // namespace sixdof
