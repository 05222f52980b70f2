#include "sixdof/calibration.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <ostream>

#include "sixdof/clustering.hpp"
#include "sixdof/csv.hpp"
#include "sixdof/error.hpp"
#include "sixdof/parallel.hpp"

namespace sixdof {

std::vector<RocPoint> roc_curve(std::span<const RocSample> samples) {
  std::vector<RocSample> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const RocSample& a, const RocSample& b) { return a.value < b.value; });
  const auto positives = static_cast<std::size_t>(
      std::count_if(sorted.begin(), sorted.end(), [](const RocSample& s) { return s.positive; }));
  const std::size_t negatives = sorted.size() - positives;
  if (positives == 0) throw Error(ErrorKind::NoPositives, "ROC needs at least one positive label");
  if (negatives == 0) throw Error(ErrorKind::NoNegatives, "ROC needs at least one negative label");

  std::vector<double> candidates{0.0, 1.0};
  for (const auto& s : sorted) candidates.push_back(s.value);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // Sweep upward; `below` marks the samples already predicted negative.
  std::vector<RocPoint> roc;
  roc.reserve(candidates.size());
  std::size_t below = 0;
  std::size_t tp = positives;
  std::size_t fp = negatives;
  for (double th : candidates) {
    while (below < sorted.size() && sorted[below].value < th) {
      (sorted[below].positive ? tp : fp)--;
      ++below;
    }
    roc.push_back({th, static_cast<double>(tp) / static_cast<double>(positives),
                   static_cast<double>(fp) / static_cast<double>(negatives)});
  }
  return roc;
}

ThresholdChoice select_threshold(std::span<const RocPoint> roc, double target_tpr) {
  if (roc.empty()) throw Error(ErrorKind::InvalidParams, "empty ROC curve");
  const RocPoint* best = nullptr;
  double max_tpr = 0.0;
  for (const auto& p : roc) {
    max_tpr = std::max(max_tpr, p.tpr);
    if (p.tpr >= target_tpr && (!best || p.threshold > best->threshold)) best = &p;
  }
  if (!best) {
    throw Error(ErrorKind::UnattainableTarget,
                fmt::format("target TPR {} exceeds the best achievable {}", target_tpr, max_tpr));
  }
  return {best->threshold, best->tpr, best->fpr};
}

std::vector<RocSample> roc_samples(const FeatureTable& table, MetricId metric,
                                   const RegulatorSet& regulators, double overlap_threshold) {
  std::vector<RocSample> out;
  const std::size_t n = table.user_count();
  for (std::size_t f = 0; f < table.frame_count(); ++f) {
    const SimilarityMatrix w = table.matrix(f, metric, regulators);
    const SimilarityMatrix o = table.overlap_matrix(f);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (w.valid(i, j) && o.valid(i, j)) {
          out.push_back({w.value(i, j), o.value(i, j) >= overlap_threshold});
        }
      }
    }
  }
  return out;
}

std::vector<RegulatorSet> ablation_grid(MetricId metric, std::span<const double> grid,
                                        const PartialRegulators& fixed) {
  if (metric == MetricId::Overlap) {
    throw Error(ErrorKind::InvalidParams, "overlap has no regulators to ablate");
  }
  if (grid.empty()) throw Error(ErrorKind::InvalidParams, "ablation grid is empty");
  const std::vector<double> values(grid.begin(), grid.end());
  auto axis = [&](const std::optional<double>& pin) {
    return pin ? std::vector<double>{*pin} : values;
  };
  const bool multi = is_multi_feature(metric);
  const auto alphas = axis(fixed.alpha);
  const auto betas = multi ? axis(fixed.beta) : std::vector<double>{fixed.beta.value_or(0.0)};
  const auto gammas = multi ? axis(fixed.gamma) : std::vector<double>{fixed.gamma.value_or(0.0)};
  std::vector<RegulatorSet> out;
  for (double a : alphas) {
    for (double b : betas) {
      for (double g : gammas) {
        RegulatorSet r{a, b, g};
        r.validate();
        out.push_back(r);
      }
    }
  }
  return out;
}

namespace {

std::optional<double> mean_of(const std::vector<std::optional<double>>& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& x : v) {
    if (x) {
      sum += *x;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

std::vector<AblationRecord> ablate(std::span<const FeatureTable* const> tables, MetricId metric,
                                   std::span<const double> grid, const AblationOptions& options,
                                   const PartialRegulators& fixed) {
  const auto points = ablation_grid(metric, grid, fixed);
  if (tables.empty()) throw Error(ErrorKind::InvalidParams, "ablation needs at least one content");

  std::vector<std::vector<SimilarityMatrix>> overlaps;
  for (const FeatureTable* t : tables) overlaps.push_back(overlap_matrices(*t, options.threads));

  std::vector<AblationRecord> records(points.size());
  parallel_for(points.size(), options.threads, [&](std::size_t g) {
    std::vector<std::optional<double>> o, p, q;
    for (std::size_t c = 0; c < tables.size(); ++c) {
      const FeatureTable& t = *tables[c];
      std::vector<std::optional<double>> fo, fp, fq;
      for (std::size_t f = 0; f < t.frame_count(); ++f) {
        const SimilarityMatrix m = t.matrix(f, metric, points[g]);
        const auto result = clique_clustering(build_adjacency(m, options.threshold), &m,
                                              options.evaluation.relevant_min_size);
        const auto perf = evaluate_frame(result, overlaps[c][f], options.evaluation);
        fo.push_back(perf.overlap_ratio);
        fp.push_back(perf.relevant_population);
        fq.push_back(perf.precision);
      }
      o.push_back(mean_of(fo));
      p.push_back(mean_of(fp));
      q.push_back(mean_of(fq));
    }
    records[g] = {metric, points[g], mean_of(o), mean_of(p), mean_of(q)};
  });
  return records;
}

namespace {

// Undefined ranks lowest; equal values keep the earlier (smaller) regulators.
const AblationRecord& argmax(std::span<const AblationRecord> records,
                             std::optional<double> AblationRecord::*field) {
  const AblationRecord* best = &records.front();
  for (const auto& r : records) {
    const auto& v = r.*field;
    const auto& b = best->*field;
    const bool better = v && (!b || *v > *b || (*v == *b && r.regulators < best->regulators));
    const bool tie_undefined = !v && !b && r.regulators < best->regulators;
    if (better || tie_undefined) best = &r;
  }
  return *best;
}

}  // namespace

ParameterSets select_parameter_sets(std::span<const AblationRecord> records) {
  if (records.empty()) throw Error(ErrorKind::InvalidParams, "no ablation records");
  return {argmax(records, &AblationRecord::overlap_ratio),
          argmax(records, &AblationRecord::relevant_population),
          argmax(records, &AblationRecord::precision)};
}

void write_roc_csv(std::ostream& out, std::span<const RocPoint> roc) {
  out << "threshold,tpr,fpr\n";
  for (const auto& p : roc) {
    out << csv::fmt_double(p.threshold) << ',' << csv::fmt_double(p.tpr) << ','
        << csv::fmt_double(p.fpr) << '\n';
  }
}

void write_ablation_csv(std::ostream& out, std::span<const AblationRecord> records) {
  auto cell = [](const std::optional<double>& v) { return v ? csv::fmt_double(*v) : ""; };
  out << "metric,alpha,beta,gamma,overlap_ratio,relevant_population,precision\n";
  for (const auto& r : records) {
    out << to_string(r.metric) << ',' << csv::fmt_double(r.regulators.alpha) << ','
        << csv::fmt_double(r.regulators.beta) << ',' << csv::fmt_double(r.regulators.gamma) << ','
        << cell(r.overlap_ratio) << ',' << cell(r.relevant_population) << ','
        << cell(r.precision) << '\n';
  }
}

}  // namespace sixdof
