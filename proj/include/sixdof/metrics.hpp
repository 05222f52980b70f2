#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sixdof/geometry.hpp"
#include "sixdof/surface_graph.hpp"
#include "sixdof/trajectory.hpp"

namespace sixdof {

enum class MetricId { W1, W2, W3, W4, W5, W6, W7, W8, Overlap };

inline constexpr std::array<MetricId, 8> kProxyMetrics = {
    MetricId::W1, MetricId::W2, MetricId::W3, MetricId::W4,
    MetricId::W5, MetricId::W6, MetricId::W7, MetricId::W8};

std::string_view to_string(MetricId id);            // "w1".."w8", "overlap"
std::optional<MetricId> parse_metric(std::string_view name);

bool is_multi_feature(MetricId id);  // W5..W8
bool needs_geodesic(MetricId id);    // W3, W5, W7
bool needs_pr(MetricId id);          // everything but W1 and Overlap

struct RegulatorSet {
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 0.0;

  // Throws InvalidParams on negative or non-finite values.
  void validate() const;

  friend auto operator<=>(const RegulatorSet&, const RegulatorSet&) = default;
};

struct MetricConfig {
  MetricId metric = MetricId::W1;
  RegulatorSet regulators;
  double threshold = 0.0;  // S_th, or O_th for Overlap
};

// Regulators and thresholds used when nothing else is configured.
MetricConfig default_config(MetricId id);

inline constexpr double kDefaultOverlapThreshold = 0.75;

// e^(-alpha d). alpha == 0 gives 1 for every d; d == +inf gives 0 otherwise.
double gaussian_kernel(double alpha, double d);
double tanh_kernel(double r);

// |Si n Sj| / |Si u Sj| over sorted index sets; empty when both sets are empty.
std::optional<double> overlap_ratio(const ViewportSet& si, const ViewportSet& sj);
std::size_t intersection_size(const ViewportSet& si, const ViewportSet& sj);

// Distance features of one user pair at one frame.
struct PairFeatures {
  bool has_x = false;   // both users captured this frame
  bool has_pr = false;  // both users on content
  bool has_gp = false;  // geodesic between viewport centres computed
  double ex = 0.0;      // E(x_i, x_j)
  double dr = 0.0;      // |r_i - r_j|
  double ep = 0.0;      // E(p_i, p_j)
  double gp = 0.0;      // G(p_i, p_j)
  double ri = 0.0;
  double rj = 0.0;
};

// True when `id` can be evaluated from `f` (Overlap never can).
bool metric_defined(MetricId id, const PairFeatures& f);

// Throws OffContent when a needed sample is missing, MissingGraph when a
// geodesic is needed but was not computed.
double metric_from_features(MetricId id, const RegulatorSet& reg, const PairFeatures& f);

// `graph` may be null for metrics without a geodesic term.
PairFeatures pair_features(const TrajectorySample& si, const TrajectorySample& sj,
                           const SurfaceGraph* graph);

double metric_value(MetricId id, const RegulatorSet& reg, const TrajectorySample& si,
                    const TrajectorySample& sj, const SurfaceGraph* graph);

// Symmetric n x n matrix with a validity mask; the diagonal is never valid.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::int64_t frame, std::size_t n, MetricId metric);

  std::int64_t frame() const { return frame_; }
  std::size_t size() const { return n_; }
  MetricId metric() const { return metric_; }

  bool valid(std::size_t i, std::size_t j) const { return valid_[i * n_ + j] != 0; }
  double value(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  std::optional<double> get(std::size_t i, std::size_t j) const {
    if (!valid(i, j)) return std::nullopt;
    return value(i, j);
  }

  void set(std::size_t i, std::size_t j, double v);
  void invalidate(std::size_t i, std::size_t j);

  // Number of pair evaluations performed to fill the matrix.
  std::size_t evaluations = 0;

  // Compares frame, metric, mask and valid values; ignores `evaluations`.
  friend bool operator==(const SimilarityMatrix& a, const SimilarityMatrix& b) {
    return a.frame_ == b.frame_ && a.n_ == b.n_ && a.metric_ == b.metric_ &&
           a.values_ == b.values_ && a.valid_ == b.valid_;
  }

 private:
  std::int64_t frame_ = 0;
  std::size_t n_ = 0;
  MetricId metric_ = MetricId::W1;
  std::vector<double> values_;
  std::vector<char> valid_;
};

struct FrameSlice {
  std::int64_t frame = 0;
  std::span<const TrajectorySample> samples;  // one per user
  const SurfaceGraph* graph = nullptr;       // for geodesic metrics
  const PointCloudFrame* cloud = nullptr;    // for Overlap
  FrustumParams frustum;                     // for Overlap
};

// Pairs whose samples lack what the metric needs are masked, not errors.
// Throws MissingGraph / InvalidParams when the slice lacks the graph or cloud.
SimilarityMatrix pairwise_matrix(MetricId id, const RegulatorSet& reg, const FrameSlice& slice);

// frame,user_i,user_j,metric,value,valid; one row per unordered pair.
void write_matrices_csv(std::ostream& out, std::span<const SimilarityMatrix> matrices,
                        std::span<const std::string> user_ids);

struct MatrixTable {
  std::vector<std::string> user_ids;
  std::vector<SimilarityMatrix> matrices;
};
MatrixTable read_matrices_csv(std::istream& in);

}  // namespace sixdof
