#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "sixdof/evaluation.hpp"
#include "sixdof/features.hpp"
#include "sixdof/metrics.hpp"

namespace sixdof {

struct RocSample {
  double value = 0.0;
  bool positive = false;
};

struct RocPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

// One point per candidate threshold (distinct values plus 0 and 1), ascending.
// A sample is predicted positive when value >= threshold.
// Throws NoPositives / NoNegatives.
std::vector<RocPoint> roc_curve(std::span<const RocSample> samples);

struct ThresholdChoice {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

// Largest threshold whose TPR reaches `target_tpr`. Throws UnattainableTarget,
// or InvalidParams on an empty curve.
ThresholdChoice select_threshold(std::span<const RocPoint> roc, double target_tpr);

// Every valid pair-frame of `table`, labelled O >= overlap_threshold.
std::vector<RocSample> roc_samples(const FeatureTable& table, MetricId metric,
                                   const RegulatorSet& regulators, double overlap_threshold);

inline const std::vector<double> kDefaultAblationGrid = {0, 0.05, 0.1, 0.125, 0.2,
                                                        0.25, 0.5, 1, 2};

struct PartialRegulators {
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> gamma;
};

struct AblationRecord {
  MetricId metric = MetricId::W1;
  RegulatorSet regulators;
  std::optional<double> overlap_ratio;
  std::optional<double> relevant_population;
  std::optional<double> precision;

  friend bool operator==(const AblationRecord&, const AblationRecord&) = default;
};

struct AblationOptions {
  double threshold = 0.0;  // S_th applied at every grid point
  EvaluationOptions evaluation;
  unsigned threads = 0;
};

// Regulator combinations in record order: alpha outermost, gamma innermost.
// Single-feature metrics vary alpha only (beta = gamma = 0).
std::vector<RegulatorSet> ablation_grid(MetricId metric, std::span<const double> grid,
                                        const PartialRegulators& fixed = {});

// Frame-based clustering at every grid point; performance is averaged over
// frames within each content and then across contents.
std::vector<AblationRecord> ablate(std::span<const FeatureTable* const> tables, MetricId metric,
                                   std::span<const double> grid, const AblationOptions& options,
                                   const PartialRegulators& fixed = {});

struct ParameterSets {
  AblationRecord set1;  // best overlap ratio
  AblationRecord set2;  // best relevant population
  AblationRecord set3;  // best precision
};

// Undefined values rank below everything; ties go to the smaller (alpha,
// beta, gamma).
ParameterSets select_parameter_sets(std::span<const AblationRecord> records);

// threshold,tpr,fpr
void write_roc_csv(std::ostream& out, std::span<const RocPoint> roc);
// metric,alpha,beta,gamma,overlap_ratio,relevant_population,precision
void write_ablation_csv(std::ostream& out, std::span<const AblationRecord> records);

}  // namespace sixdof
