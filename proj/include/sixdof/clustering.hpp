#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sixdof/features.hpp"
#include "sixdof/metrics.hpp"

namespace sixdof {

class SimilarityGraph {
 public:
  SimilarityGraph() = default;
  SimilarityGraph(std::int64_t id, std::size_t n);

  std::int64_t id() const { return id_; }
  std::size_t size() const { return n_; }
  bool adjacent(std::size_t i, std::size_t j) const { return adj_[i * n_ + j] != 0; }
  void add_edge(std::size_t i, std::size_t j);  // ignores i == j
  std::size_t edge_count() const;

  friend bool operator==(const SimilarityGraph&, const SimilarityGraph&) = default;

 private:
  std::int64_t id_ = 0;
  std::size_t n_ = 0;
  std::vector<char> adj_;
};

struct Cluster {
  std::vector<std::size_t> members;  // user indices, ascending
  bool clique = true;
  bool relevant = false;  // size >= relevant_min_size

  std::size_t size() const { return members.size(); }
  friend bool operator==(const Cluster&, const Cluster&) = default;
};

struct ClusteringResult {
  std::int64_t id = 0;  // frame index, or chunk index
  bool chunk = false;
  std::int64_t begin_frame = 0;  // covered frames [begin_frame, end_frame)
  std::int64_t end_frame = 0;
  std::size_t n = 0;
  std::vector<Cluster> clusters;  // extraction order

  friend bool operator==(const ClusteringResult&, const ClusteringResult&) = default;
};

struct ChunkSpec {
  double window = 1.0;       // seconds
  double persistence = 0.8;  // fraction of a pair's valid frames

  void validate() const;  // InvalidParams
};

inline constexpr std::size_t kMaxCliqueUsers = 64;
inline constexpr std::size_t kDefaultRelevantMinSize = 3;

// Edge iff the pair is valid and value >= threshold.
SimilarityGraph build_adjacency(const SimilarityMatrix& matrix, double threshold);
inline SimilarityGraph build_adjacency(const SimilarityMatrix& matrix, const MetricConfig& config) {
  return build_adjacency(matrix, config.threshold);
}

// Largest clique. Ties: higher mean pairwise similarity in `matrix` (when
// given), then the lexicographically smaller member list. An edgeless graph
// yields its lowest vertex. Throws SizeLimitExceeded above kMaxCliqueUsers.
Cluster max_clique(const SimilarityGraph& graph, const SimilarityMatrix* matrix = nullptr);

// Greedy peeling of maximum cliques; leftover vertices become singletons.
ClusteringResult clique_clustering(const SimilarityGraph& graph,
                                   const SimilarityMatrix* matrix = nullptr,
                                   std::size_t relevant_min_size = kDefaultRelevantMinSize);

// Frame ranges [begin, end) of consecutive chunks. A trailing chunk shorter
// than half a window is dropped.
std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(std::size_t frame_count, double fps,
                                                              const ChunkSpec& spec);

// Fraction of each pair's valid frames with value >= threshold. Pairs with no
// valid frame are invalid.
SimilarityMatrix persistence_fraction(std::span<const SimilarityMatrix> frames, double threshold,
                                      std::int64_t id = 0);

// Mean of the valid per-frame values of each pair.
SimilarityMatrix mean_matrix(std::span<const SimilarityMatrix> frames, std::int64_t id = 0);

SimilarityGraph chunk_adjacency(std::span<const SimilarityMatrix> frames, double threshold,
                                const ChunkSpec& spec, std::int64_t id = 0);
inline SimilarityGraph chunk_adjacency(std::span<const SimilarityMatrix> frames,
                                       const MetricConfig& config, const ChunkSpec& spec,
                                       std::int64_t id = 0) {
  return chunk_adjacency(frames, config.threshold, spec, id);
}

// One result per frame, or per chunk when `spec` is set. Frames or chunks are
// clustered in parallel; output does not depend on `threads`.
std::vector<ClusteringResult> cluster_matrices(std::span<const SimilarityMatrix> frames, double fps,
                                               double threshold,
                                               const std::optional<ChunkSpec>& spec,
                                               std::size_t relevant_min_size = kDefaultRelevantMinSize,
                                               unsigned threads = 0);

std::vector<ClusteringResult> cluster_over_time(const FeatureTable& table,
                                                const MetricConfig& config,
                                                const std::optional<ChunkSpec>& spec,
                                                std::size_t relevant_min_size = kDefaultRelevantMinSize,
                                                unsigned threads = 0);

// All per-frame matrices of one metric.
std::vector<SimilarityMatrix> frame_matrices(const FeatureTable& table, const MetricConfig& config,
                                             unsigned threads = 0);

// chunk_or_frame,user_id,cluster_id,cluster_size
void write_clusters_csv(std::ostream& out, std::span<const ClusteringResult> results,
                        std::span<const std::string> user_ids);
void write_clusters_json(std::ostream& out, std::span<const ClusteringResult> results,
                         std::span<const std::string> user_ids);

struct ClusterTable {
  std::vector<std::string> user_ids;
  std::vector<ClusteringResult> results;  // frame ranges are not recorded in CSV
};
// Relevance is recomputed with `relevant_min_size`.
ClusterTable read_clusters_csv(std::istream& in,
                               std::size_t relevant_min_size = kDefaultRelevantMinSize);

}  // namespace sixdof
