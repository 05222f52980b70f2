#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sixdof/metrics.hpp"
#include "sixdof/trajectory.hpp"

namespace sixdof {

struct FeatureOptions {
  FrustumParams frustum;
  int graph_k = 8;
  bool overlap = true;   // compute viewport sets and O per pair
  bool geodesic = true;  // compute G(p_i, p_j) per pair
  unsigned threads = 0;  // 0: hardware concurrency
  std::size_t frame_begin = 0;  // frames [frame_begin, frame_end), clamped
  std::size_t frame_end = static_cast<std::size_t>(-1);
};

// Everything regulator-independent about one frame: per-pair distance
// features and the exact overlap ratio.
struct FrameFeatures {
  std::int64_t frame = 0;
  std::vector<PairFeatures> pairs;            // upper triangle, see pair_index
  std::vector<std::optional<double>> overlap;  // same layout; empty when not computed
};

inline std::size_t pair_index(std::size_t n, std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

// Per-frame features of one content, shared read-only by clustering,
// calibration, ablation and evaluation. Kernels are re-evaluated from it for
// each regulator set.
class FeatureTable {
 public:
  FeatureTable(std::string content_id, std::vector<std::string> user_ids, double fps,
               std::vector<FrameFeatures> frames, bool has_overlap, bool has_geodesic);

  const std::string& content_id() const { return content_id_; }
  const std::vector<std::string>& user_ids() const { return user_ids_; }
  std::size_t user_count() const { return user_ids_.size(); }
  std::size_t frame_count() const { return frames_.size(); }
  double fps() const { return fps_; }
  bool has_overlap() const { return has_overlap_; }
  bool has_geodesic() const { return has_geodesic_; }
  const FrameFeatures& frame(std::size_t f) const { return frames_[f]; }

  // Metric matrix at frame f. Throws MissingGraph for geodesic metrics when
  // geodesics were not computed, InvalidParams for Overlap without overlaps.
  SimilarityMatrix matrix(std::size_t f, MetricId id, const RegulatorSet& reg) const;
  SimilarityMatrix matrix(std::size_t f, const MetricConfig& config) const {
    return matrix(f, config.metric, config.regulators);
  }
  SimilarityMatrix overlap_matrix(std::size_t f) const;

 private:
  std::string content_id_;
  std::vector<std::string> user_ids_;
  double fps_;
  std::vector<FrameFeatures> frames_;
  bool has_overlap_;
  bool has_geodesic_;
};

// Throws MissingFrame when the content does not cover the trajectories.
FeatureTable compute_features(const SessionDataset& dataset, const FeatureOptions& options);

}  // namespace sixdof
