#include "sixdof/pipeline.hpp"

#include <fmt/format.h>

#include "sixdof/error.hpp"

namespace sixdof {

FeatureTable content_features(const Manifest& manifest, const SessionDataset& dataset,
                              bool overlap, bool geodesic, const RunOptions& run) {
  FeatureOptions options;
  options.frustum = manifest.frustum;
  options.graph_k = manifest.graph_k;
  options.overlap = overlap;
  options.geodesic = geodesic;
  options.threads = run.threads;
  options.frame_begin = run.frame_begin;
  options.frame_end = run.frame_end;
  return compute_features(dataset, options);
}

std::vector<FeatureTable> manifest_features(const Manifest& manifest, bool overlap, bool geodesic,
                                            const RunOptions& run) {
  std::vector<FeatureTable> out;
  for (const auto& entry : manifest.contents) {
    out.push_back(content_features(manifest, load_dataset(manifest, entry), overlap, geodesic, run));
  }
  return out;
}

CalibrationRun calibrate_metrics(const Manifest& manifest, std::span<const FeatureTable> tables,
                                 std::span<const MetricId> metrics) {
  CalibrationRun run;
  run.file.target_tpr = manifest.target_tpr;
  run.file.overlap_threshold = manifest.overlap_threshold;
  for (MetricId id : metrics) {
    MetricConfig cfg = manifest.config(id);
    std::vector<RocSample> samples;
    for (const auto& t : tables) {
      auto s = roc_samples(t, id, cfg.regulators, manifest.overlap_threshold);
      samples.insert(samples.end(), s.begin(), s.end());
    }
    auto roc = roc_curve(samples);
    const ThresholdChoice choice = select_threshold(roc, manifest.target_tpr);
    cfg.threshold = choice.threshold;
    run.file.metrics[id] = cfg;
    run.file.achieved[id] = choice;
    run.roc[id] = std::move(roc);
  }
  return run;
}

MetricEvaluation evaluate_metric(const Manifest& manifest, std::span<const FeatureTable> tables,
                                 const MetricConfig& config, const std::optional<ChunkSpec>& chunk,
                                 unsigned threads) {
  if (tables.empty()) throw Error(ErrorKind::InvalidParams, "nothing to evaluate");
  const EvaluationOptions eval{manifest.overlap_threshold, manifest.relevant_min_size};
  const std::string name(to_string(config.metric));
  MetricEvaluation out;
  std::vector<SummaryRow> rows;
  for (const auto& t : tables) {
    ContentEvaluation ce;
    ce.content_id = t.content_id();
    const auto overlaps = overlap_matrices(t, threads);
    const auto matrices = config.metric == MetricId::Overlap ? overlaps
                                                             : frame_matrices(t, config, threads);
    ce.results = cluster_matrices(matrices, t.fps(), config.threshold, chunk,
                                  manifest.relevant_min_size, threads);
    if (ce.results.empty()) {
      throw Error(ErrorKind::EmptySeries,
                  fmt::format("content '{}' yields no frames or chunks to evaluate", t.content_id()));
    }
    ce.performance = evaluate_results(ce.results, overlaps, chunk, eval);
    ce.row = {t.content_id(), name, summarize(ce.performance)};
    rows.push_back(ce.row);
    out.contents.push_back(std::move(ce));
  }
  out.all = all_contents_row(rows, name);
  return out;
}

std::vector<const FeatureTable*> ablation_tables(const Manifest& manifest,
                                                 std::span<const FeatureTable> tables) {
  std::vector<const FeatureTable*> reference, all;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    all.push_back(&tables[i]);
    if (i < manifest.contents.size() && manifest.contents[i].reference) {
      reference.push_back(&tables[i]);
    }
  }
  return reference.empty() ? all : reference;
}

}  // namespace sixdof
