#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sixdof/calibration.hpp"
#include "sixdof/clustering.hpp"
#include "sixdof/evaluation.hpp"
#include "sixdof/features.hpp"
#include "sixdof/manifest.hpp"

namespace sixdof {

struct RunOptions {
  unsigned threads = 0;
  std::size_t frame_begin = 0;
  std::size_t frame_end = static_cast<std::size_t>(-1);
};

FeatureTable content_features(const Manifest& manifest, const SessionDataset& dataset,
                              bool overlap, bool geodesic, const RunOptions& run = {});

// Features of every manifest content, in manifest order.
std::vector<FeatureTable> manifest_features(const Manifest& manifest, bool overlap, bool geodesic,
                                            const RunOptions& run = {});

struct CalibrationRun {
  CalibrationFile file;
  std::map<MetricId, std::vector<RocPoint>> roc;
};

// ROC of each metric over all valid pair-frames of all tables, at the
// manifest regulators; thresholds picked at manifest.target_tpr.
CalibrationRun calibrate_metrics(const Manifest& manifest, std::span<const FeatureTable> tables,
                                 std::span<const MetricId> metrics);

struct ContentEvaluation {
  std::string content_id;
  std::vector<ClusteringResult> results;
  std::vector<ClusterPerformance> performance;
  SummaryRow row;
};

struct MetricEvaluation {
  std::vector<ContentEvaluation> contents;
  SummaryRow all;
};

// Clusters each content (per chunk when `chunk` is set) and scores it against
// the exact overlap.
MetricEvaluation evaluate_metric(const Manifest& manifest, std::span<const FeatureTable> tables,
                                 const MetricConfig& config, const std::optional<ChunkSpec>& chunk,
                                 unsigned threads = 0);

// Reference contents when any is flagged, otherwise all of them.
std::vector<const FeatureTable*> ablation_tables(const Manifest& manifest,
                                                 std::span<const FeatureTable> tables);

}  // namespace sixdof
