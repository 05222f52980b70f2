#include "sixdof/evaluation.hpp"

#include <fmt/format.h>

#include <cmath>
#include <ostream>

#include "sixdof/csv.hpp"
#include "sixdof/error.hpp"
#include "sixdof/parallel.hpp"

namespace sixdof {

std::optional<double> overlap_per_cluster(const Cluster& cluster, const SimilarityMatrix& overlap) {
  double sum = 0.0;
  std::size_t count = 0;
  const auto& m = cluster.members;
  for (std::size_t a = 0; a < m.size(); ++a) {
    for (std::size_t b = a + 1; b < m.size(); ++b) {
      if (auto v = overlap.get(m[a], m[b])) {
        sum += *v;
        ++count;
      }
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

double relevant_population(const ClusteringResult& result, std::size_t min_size) {
  if (result.n == 0) return 0.0;
  std::size_t users = 0;
  for (const auto& c : result.clusters) {
    if (c.size() >= min_size) users += c.size();
  }
  return static_cast<double>(users) / static_cast<double>(result.n);
}

std::optional<double> precision(const ClusteringResult& result, const SimilarityMatrix& labels,
                                double threshold) {
  std::size_t tp = 0;
  std::size_t total = 0;
  for (const auto& c : result.clusters) {
    const auto& m = c.members;
    for (std::size_t a = 0; a < m.size(); ++a) {
      for (std::size_t b = a + 1; b < m.size(); ++b) {
        auto v = labels.get(m[a], m[b]);
        if (!v) continue;
        ++total;
        if (*v >= threshold) ++tp;
      }
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(total);
}

namespace {

ClusterPerformance score(const ClusteringResult& result, const SimilarityMatrix& overlap,
                         const SimilarityMatrix& labels, double label_threshold,
                         const EvaluationOptions& options) {
  ClusterPerformance perf;
  perf.relevant_population = relevant_population(result, options.relevant_min_size);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& c : result.clusters) {
    if (c.size() < options.relevant_min_size) continue;
    ++perf.n_relevant_clusters;
    if (auto ok = overlap_per_cluster(c, overlap)) {
      sum += *ok;
      ++count;
    }
  }
  if (count) perf.overlap_ratio = sum / static_cast<double>(count);
  perf.precision = precision(result, labels, label_threshold);
  return perf;
}

}  // namespace

ClusterPerformance evaluate_frame(const ClusteringResult& result, const SimilarityMatrix& overlap,
                                  const EvaluationOptions& options) {
  return score(result, overlap, overlap, options.overlap_threshold, options);
}

ClusterPerformance evaluate_chunk(const ClusteringResult& result,
                                  std::span<const SimilarityMatrix> overlap_frames,
                                  const ChunkSpec& spec, const EvaluationOptions& options) {
  spec.validate();
  const SimilarityMatrix mean = mean_matrix(overlap_frames, result.id);
  const SimilarityMatrix held =
      persistence_fraction(overlap_frames, options.overlap_threshold, result.id);
  // Same closed threshold as chunk_adjacency.
  return score(result, mean, held, spec.persistence - 1e-12, options);
}

std::vector<ClusterPerformance> evaluate_results(std::span<const ClusteringResult> results,
                                                 std::span<const SimilarityMatrix> overlap_frames,
                                                 const std::optional<ChunkSpec>& spec,
                                                 const EvaluationOptions& options) {
  std::vector<ClusterPerformance> out;
  out.reserve(results.size());
  for (const auto& r : results) {
    if (r.begin_frame < 0 || r.end_frame <= r.begin_frame ||
        static_cast<std::size_t>(r.end_frame) > overlap_frames.size()) {
      throw Error(ErrorKind::MissingFrame,
                  fmt::format("no overlap matrices for frames [{}, {})", r.begin_frame,
                              r.end_frame));
    }
    const auto window = overlap_frames.subspan(static_cast<std::size_t>(r.begin_frame),
                                               static_cast<std::size_t>(r.end_frame - r.begin_frame));
    if (r.chunk) {
      if (!spec) throw Error(ErrorKind::InvalidParams, "chunk results need a chunk spec");
      out.push_back(evaluate_chunk(r, window, *spec, options));
    } else {
      out.push_back(evaluate_frame(r, window.front(), options));
    }
  }
  return out;
}

std::vector<SimilarityMatrix> overlap_matrices(const FeatureTable& table, unsigned threads) {
  std::vector<SimilarityMatrix> out(table.frame_count());
  parallel_for(out.size(), threads, [&](std::size_t f) { out[f] = table.overlap_matrix(f); });
  return out;
}

Aggregate aggregate(std::span<const std::optional<double>> series) {
  if (series.empty()) throw Error(ErrorKind::EmptySeries, "cannot aggregate an empty series");
  Aggregate a;
  double sum = 0.0;
  for (const auto& v : series) {
    if (v && std::isfinite(*v)) {
      sum += *v;
      ++a.valid;
    } else {
      ++a.invalid;
    }
  }
  if (a.valid == 0) return a;
  const double mean = sum / static_cast<double>(a.valid);
  double ss = 0.0;
  for (const auto& v : series) {
    if (v && std::isfinite(*v)) ss += (*v - mean) * (*v - mean);
  }
  a.mean = mean;
  a.std = std::sqrt(ss / static_cast<double>(a.valid));
  return a;
}

PerformanceSummary summarize(std::span<const ClusterPerformance> series) {
  std::vector<std::optional<double>> o, p, q;
  for (const auto& s : series) {
    o.push_back(s.overlap_ratio);
    p.push_back(s.relevant_population);
    q.push_back(s.precision);
  }
  return {aggregate(o), aggregate(p), aggregate(q)};
}

SummaryRow all_contents_row(std::span<const SummaryRow> rows, const std::string& metric) {
  std::vector<std::optional<double>> o, p, q;
  for (const auto& r : rows) {
    o.push_back(r.summary.overlap_ratio.mean);
    p.push_back(r.summary.relevant_population.mean);
    q.push_back(r.summary.precision.mean);
  }
  return {"All", metric, {aggregate(o), aggregate(p), aggregate(q)}};
}

namespace {

std::string cell(const std::optional<double>& v) { return v ? csv::fmt_double(*v) : ""; }

std::string pretty(const Aggregate& a) {
  if (!a.mean) return "n/a";
  return fmt::format("{:.2f} ± {:.2f}", *a.mean, a.std);
}

}  // namespace

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << "content,metric,overlap_mean,overlap_std,population_mean,population_std,"
         "precision_mean,precision_std,n_overlap,n_population,n_precision\n";
  for (const auto& r : rows) {
    const auto& s = r.summary;
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.content_id, r.metric,
                       cell(s.overlap_ratio.mean), csv::fmt_double(s.overlap_ratio.std),
                       cell(s.relevant_population.mean),
                       csv::fmt_double(s.relevant_population.std), cell(s.precision.mean),
                       csv::fmt_double(s.precision.std), s.overlap_ratio.valid,
                       s.relevant_population.valid, s.precision.valid);
  }
}

void write_summary_table(std::ostream& out, std::span<const SummaryRow> rows) {
  out << fmt::format("{:<16} {:<8} {:>14} {:>14} {:>14}\n", "content", "metric", "overlap",
                     "population", "precision");
  for (const auto& r : rows) {
    out << fmt::format("{:<16} {:<8} {:>14} {:>14} {:>14}\n", r.content_id, r.metric,
                       pretty(r.summary.overlap_ratio), pretty(r.summary.relevant_population),
                       pretty(r.summary.precision));
  }
}

void write_performance_csv(std::ostream& out, std::span<const ClusteringResult> results,
                           std::span<const ClusterPerformance> performance) {
  out << "frame_or_chunk,overlap_ratio,relevant_population,precision,n_relevant_clusters\n";
  for (std::size_t i = 0; i < results.size() && i < performance.size(); ++i) {
    const auto& p = performance[i];
    out << fmt::format("{},{},{},{},{}\n", results[i].id, cell(p.overlap_ratio),
                       csv::fmt_double(p.relevant_population), cell(p.precision),
                       p.n_relevant_clusters);
  }
}

}  // namespace sixdof
