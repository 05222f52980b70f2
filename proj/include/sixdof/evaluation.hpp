#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sixdof/clustering.hpp"
#include "sixdof/features.hpp"

namespace sixdof {

struct ClusterPerformance {
  std::optional<double> overlap_ratio;  // mean O_k over relevant clusters
  double relevant_population = 0.0;
  std::optional<double> precision;  // empty when no user shares a cluster
  std::size_t n_relevant_clusters = 0;
};

// Mean O over the cluster's unordered member pairs with a valid entry.
// Empty for singletons or when no member pair is valid.
std::optional<double> overlap_per_cluster(const Cluster& cluster, const SimilarityMatrix& overlap);

double relevant_population(const ClusteringResult& result, std::size_t min_size);

// TP / (TP + FP) over same-cluster pairs; a pair is positive when its label
// value is >= threshold. Pairs without a valid label are skipped.
std::optional<double> precision(const ClusteringResult& result, const SimilarityMatrix& labels,
                                double threshold);

struct EvaluationOptions {
  double overlap_threshold = 0.75;
  std::size_t relevant_min_size = 3;
};

// Scores one per-frame result against that frame's overlap matrix.
ClusterPerformance evaluate_frame(const ClusteringResult& result, const SimilarityMatrix& overlap,
                                  const EvaluationOptions& options);

// Scores one chunk result. O_k uses the chunk-mean overlap; a same-cluster
// pair counts as a true positive when O >= O_th held for at least the
// persistence fraction of its valid frames.
ClusterPerformance evaluate_chunk(const ClusteringResult& result,
                                  std::span<const SimilarityMatrix> overlap_frames,
                                  const ChunkSpec& spec, const EvaluationOptions& options);

// Dispatches on result.chunk using the result's frame range.
std::vector<ClusterPerformance> evaluate_results(std::span<const ClusteringResult> results,
                                                 std::span<const SimilarityMatrix> overlap_frames,
                                                 const std::optional<ChunkSpec>& spec,
                                                 const EvaluationOptions& options);

std::vector<SimilarityMatrix> overlap_matrices(const FeatureTable& table, unsigned threads = 0);

struct Aggregate {
  std::optional<double> mean;  // empty when no entry is valid
  double std = 0.0;            // population standard deviation
  std::size_t valid = 0;
  std::size_t invalid = 0;
};

// Throws EmptySeries on an empty series.
Aggregate aggregate(std::span<const std::optional<double>> series);

struct PerformanceSummary {
  Aggregate overlap_ratio;
  Aggregate relevant_population;
  Aggregate precision;
};

PerformanceSummary summarize(std::span<const ClusterPerformance> series);

struct SummaryRow {
  std::string content_id;  // "All" for the cross-content row
  std::string metric;
  PerformanceSummary summary;
};

// Mean and std across the per-content means of the given rows.
SummaryRow all_contents_row(std::span<const SummaryRow> rows, const std::string& metric);

// content,metric,overlap_mean,overlap_std,population_mean,population_std,
// precision_mean,precision_std,n_overlap,n_population,n_precision
void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);
// Human-readable "mean ± std" table.
void write_summary_table(std::ostream& out, std::span<const SummaryRow> rows);

// frame_or_chunk,overlap_ratio,relevant_population,precision,n_relevant_clusters
void write_performance_csv(std::ostream& out, std::span<const ClusteringResult> results,
                           std::span<const ClusterPerformance> performance);

}  // namespace sixdof
