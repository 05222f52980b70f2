#include "sixdof/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include "sixdof/csv.hpp"
#include "sixdof/error.hpp"

namespace sixdof {

std::string_view to_string(MetricId id) {
  switch (id) {
    case MetricId::W1: return "w1";
    case MetricId::W2: return "w2";
    case MetricId::W3: return "w3";
    case MetricId::W4: return "w4";
    case MetricId::W5: return "w5";
    case MetricId::W6: return "w6";
    case MetricId::W7: return "w7";
    case MetricId::W8: return "w8";
    case MetricId::Overlap: return "overlap";
  }
  return "?";
}

std::optional<MetricId> parse_metric(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (MetricId id : kProxyMetrics) {
    if (lower == to_string(id)) return id;
  }
  if (lower == "overlap" || lower == "o") return MetricId::Overlap;
  return std::nullopt;
}

bool is_multi_feature(MetricId id) {
  return id == MetricId::W5 || id == MetricId::W6 || id == MetricId::W7 || id == MetricId::W8;
}

bool needs_geodesic(MetricId id) {
  return id == MetricId::W3 || id == MetricId::W5 || id == MetricId::W7;
}

bool needs_pr(MetricId id) { return id != MetricId::W1 && id != MetricId::Overlap; }

void RegulatorSet::validate() const {
  for (double v : {alpha, beta, gamma}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::InvalidParams,
                  fmt::format("regulators must be finite and >= 0: [{}, {}, {}]", alpha, beta, gamma));
    }
  }
}

MetricConfig default_config(MetricId id) {
  switch (id) {
    case MetricId::W1: return {id, {1.0, 0.0, 0.0}, 0.64};
    case MetricId::W2: return {id, {1.0, 0.0, 0.0}, 0.80};
    case MetricId::W3: return {id, {1.0, 0.0, 0.0}, 0.63};
    case MetricId::W4: return {id, {1.0, 0.0, 0.0}, 0.84};
    case MetricId::W5: return {id, {0.1, 0.5, 1.0}, 0.54};
    case MetricId::W6: return {id, {0.1, 0.125, 0.2}, 0.87};
    case MetricId::W7: return {id, {0.25, 0.5, 0.5}, 0.60};
    case MetricId::W8: return {id, {0.5, 0.5, 0.5}, 0.62};
    case MetricId::Overlap: return {id, {0.0, 0.0, 0.0}, kDefaultOverlapThreshold};
  }
  return {};
}

double gaussian_kernel(double alpha, double d) {
  if (alpha == 0.0) return 1.0;
  if (std::isinf(d)) return 0.0;
  return std::exp(-alpha * d);
}

double tanh_kernel(double r) { return std::tanh(r); }

std::size_t intersection_size(const ViewportSet& si, const ViewportSet& sj) {
  std::size_t count = 0;
  auto a = si.begin();
  auto b = sj.begin();
  while (a != si.end() && b != sj.end()) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      ++count;
      ++a;
      ++b;
    }
  }
  return count;
}

std::optional<double> overlap_ratio(const ViewportSet& si, const ViewportSet& sj) {
  if (si.empty() && sj.empty()) return std::nullopt;
  const std::size_t inter = intersection_size(si, sj);
  const std::size_t uni = si.size() + sj.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

bool metric_defined(MetricId id, const PairFeatures& f) {
  switch (id) {
    case MetricId::W1: return f.has_x;
    case MetricId::W2:
    case MetricId::W4:
    case MetricId::W6:
    case MetricId::W8: return f.has_pr;
    case MetricId::W3:
    case MetricId::W5:
    case MetricId::W7: return f.has_pr && f.has_gp;
    case MetricId::Overlap: return false;
  }
  return false;
}

double metric_from_features(MetricId id, const RegulatorSet& reg, const PairFeatures& f) {
  if (id == MetricId::Overlap) {
    throw Error(ErrorKind::InvalidParams, "overlap is computed from viewport sets, not features");
  }
  if (id == MetricId::W1 ? !f.has_x : !f.has_pr) {
    throw Error(ErrorKind::OffContent,
                fmt::format("{} needs both samples on content", to_string(id)));
  }
  if (needs_geodesic(id) && !f.has_gp) {
    throw Error(ErrorKind::MissingGraph, fmt::format("{} needs a surface graph", to_string(id)));
  }
  const double ka = gaussian_kernel(reg.alpha, f.ex);
  switch (id) {
    case MetricId::W1: return ka;
    case MetricId::W2: return gaussian_kernel(reg.alpha, f.dr);
    case MetricId::W3: return gaussian_kernel(reg.alpha, f.gp);
    case MetricId::W4: return gaussian_kernel(reg.alpha, f.ep);
    case MetricId::W5: return ka * gaussian_kernel(reg.beta, f.dr) * gaussian_kernel(reg.gamma, f.gp);
    case MetricId::W6: return ka * gaussian_kernel(reg.beta, f.dr) * gaussian_kernel(reg.gamma, f.ep);
    case MetricId::W7:
      return ka * (reg.beta * (tanh_kernel(f.ri) + tanh_kernel(f.rj))) *
             gaussian_kernel(reg.gamma, f.gp);
    case MetricId::W8:
      return ka * (reg.beta * (tanh_kernel(f.ri) + tanh_kernel(f.rj))) *
             gaussian_kernel(reg.gamma, f.ep);
    case MetricId::Overlap: break;
  }
  return 0.0;
}

PairFeatures pair_features(const TrajectorySample& si, const TrajectorySample& sj,
                           const SurfaceGraph* graph) {
  PairFeatures f;
  f.has_x = !si.gap && !sj.gap;
  if (f.has_x) f.ex = euclidean_distance(si.x, sj.x);
  f.has_pr = si.on_content() && sj.on_content() && si.p && sj.p && si.r && sj.r;
  if (f.has_pr) {
    f.ri = *si.r;
    f.rj = *sj.r;
    f.dr = std::abs(f.ri - f.rj);
    f.ep = euclidean_distance(*si.p, *sj.p);
    if (graph != nullptr) {
      f.gp = geodesic_distance(*graph, *si.p, *sj.p);
      f.has_gp = true;
    }
  }
  return f;
}

double metric_value(MetricId id, const RegulatorSet& reg, const TrajectorySample& si,
                    const TrajectorySample& sj, const SurfaceGraph* graph) {
  if (needs_geodesic(id) && graph == nullptr) {
    throw Error(ErrorKind::MissingGraph, fmt::format("{} needs a surface graph", to_string(id)));
  }
  return metric_from_features(id, reg, pair_features(si, sj, needs_geodesic(id) ? graph : nullptr));
}

SimilarityMatrix::SimilarityMatrix(std::int64_t frame, std::size_t n, MetricId metric)
    : frame_(frame), n_(n), metric_(metric), values_(n * n, 0.0), valid_(n * n, 0) {}

void SimilarityMatrix::set(std::size_t i, std::size_t j, double v) {
  if (i == j) return;
  values_[i * n_ + j] = v;
  values_[j * n_ + i] = v;
  valid_[i * n_ + j] = 1;
  valid_[j * n_ + i] = 1;
}

void SimilarityMatrix::invalidate(std::size_t i, std::size_t j) {
  values_[i * n_ + j] = 0.0;
  values_[j * n_ + i] = 0.0;
  valid_[i * n_ + j] = 0;
  valid_[j * n_ + i] = 0;
}

SimilarityMatrix pairwise_matrix(MetricId id, const RegulatorSet& reg, const FrameSlice& slice) {
  reg.validate();
  const std::size_t n = slice.samples.size();
  SimilarityMatrix m(slice.frame, n, id);
  if (id == MetricId::Overlap) {
    if (slice.cloud == nullptr) {
      throw Error(ErrorKind::InvalidParams, "overlap matrix needs the frame's point cloud");
    }
    std::vector<ViewportSet> sets(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!slice.samples[i].gap) {
        sets[i] = viewport_set(build_frustum(slice.samples[i].pose(), slice.frustum), *slice.cloud);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        ++m.evaluations;
        if (slice.samples[i].gap || slice.samples[j].gap) continue;
        if (auto o = overlap_ratio(sets[i], sets[j])) m.set(i, j, *o);
      }
    }
    return m;
  }
  if (needs_geodesic(id) && slice.graph == nullptr) {
    throw Error(ErrorKind::MissingGraph, fmt::format("{} needs a surface graph", to_string(id)));
  }
  const SurfaceGraph* graph = needs_geodesic(id) ? slice.graph : nullptr;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      ++m.evaluations;
      const PairFeatures f = pair_features(slice.samples[i], slice.samples[j], graph);
      if (metric_defined(id, f)) m.set(i, j, metric_from_features(id, reg, f));
    }
  }
  return m;
}

void write_matrices_csv(std::ostream& out, std::span<const SimilarityMatrix> matrices,
                        std::span<const std::string> user_ids) {
  out << "frame,user_i,user_j,metric,value,valid\n";
  for (const auto& m : matrices) {
    if (m.size() != user_ids.size()) {
      throw Error(ErrorKind::InvalidParams, "matrix size does not match user list");
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = i + 1; j < m.size(); ++j) {
        const bool ok = m.valid(i, j);
        out << fmt::format("{},{},{},{},{},{}\n", m.frame(), user_ids[i], user_ids[j],
                           to_string(m.metric()), ok ? csv::fmt_double(m.value(i, j)) : "nan",
                           ok ? 1 : 0);
      }
    }
  }
}

MatrixTable read_matrices_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || csv::split(line) != std::vector<std::string>{
                                     "frame", "user_i", "user_j", "metric", "value", "valid"}) {
    throw Error(ErrorKind::Schema, "matrix csv: unexpected header");
  }
  struct Row {
    std::int64_t frame;
    std::string a, b;
    MetricId metric;
    double value;
    bool valid;
  };
  std::vector<Row> rows;
  std::map<std::string, std::size_t> ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = csv::split(line);
    const auto frame = f.size() == 6 ? csv::to_int(f[0]) : std::nullopt;
    const auto metric = f.size() == 6 ? parse_metric(f[3]) : std::nullopt;
    const auto value = f.size() == 6 ? csv::to_double(f[4]) : std::nullopt;
    const auto valid = f.size() == 6 ? csv::to_int(f[5]) : std::nullopt;
    if (!frame || !metric || !value || !valid) {
      throw Error(ErrorKind::Parse, fmt::format("matrix csv:{}: malformed row", line_no));
    }
    rows.push_back({*frame, f[1], f[2], *metric, *value, *valid != 0});
    ids.emplace(f[1], 0);
    ids.emplace(f[2], 0);
  }
  MatrixTable table;
  for (auto& [id, idx] : ids) {
    idx = table.user_ids.size();
    table.user_ids.push_back(id);
  }
  std::map<std::pair<std::int64_t, MetricId>, std::size_t> slot;
  for (const Row& r : rows) {
    auto [it, inserted] = slot.emplace(std::make_pair(r.frame, r.metric), table.matrices.size());
    if (inserted) table.matrices.emplace_back(r.frame, ids.size(), r.metric);
    auto& m = table.matrices[it->second];
    if (r.valid) m.set(ids[r.a], ids[r.b], r.value);
  }
  return table;
}

}  // namespace sixdof
