#include "sixdof/clustering.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <json.hpp>
#include <map>
#include <ostream>

#include "sixdof/csv.hpp"
#include "sixdof/error.hpp"
#include "sixdof/parallel.hpp"

namespace sixdof {

SimilarityGraph::SimilarityGraph(std::int64_t id, std::size_t n)
    : id_(id), n_(n), adj_(n * n, 0) {}

void SimilarityGraph::add_edge(std::size_t i, std::size_t j) {
  if (i == j) return;
  adj_[i * n_ + j] = 1;
  adj_[j * n_ + i] = 1;
}

std::size_t SimilarityGraph::edge_count() const {
  return static_cast<std::size_t>(std::count(adj_.begin(), adj_.end(), 1)) / 2;
}

void ChunkSpec::validate() const {
  if (!(window > 0.0) || !std::isfinite(window)) {
    throw Error(ErrorKind::InvalidParams, fmt::format("chunk window must be > 0, got {}", window));
  }
  if (!(persistence > 0.0 && persistence <= 1.0)) {
    throw Error(ErrorKind::InvalidParams,
                fmt::format("chunk persistence must be in (0, 1], got {}", persistence));
  }
}

SimilarityGraph build_adjacency(const SimilarityMatrix& matrix, double threshold) {
  const std::size_t n = matrix.size();
  SimilarityGraph g(matrix.frame(), n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (matrix.valid(i, j) && matrix.value(i, j) >= threshold) g.add_edge(i, j);
    }
  }
  return g;
}

namespace {

using Bits = std::uint64_t;

std::vector<std::size_t> to_members(Bits set) {
  std::vector<std::size_t> out;
  while (set) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(set)));
    set &= set - 1;
  }
  return out;
}

double mean_similarity(const std::vector<std::size_t>& members, const SimilarityMatrix* matrix) {
  if (!matrix || members.size() < 2) return 0.0;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      if (auto v = matrix->get(members[a], members[b])) {
        sum += *v;
        ++count;
      }
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

class CliqueSearch {
 public:
  CliqueSearch(const std::vector<Bits>& rows, const SimilarityMatrix* matrix)
      : rows_(rows), matrix_(matrix) {}

  Bits run(Bits vertices) {
    expand(0, 0, vertices, 0);
    return best_;
  }

 private:
  void consider(Bits r, int size) {
    if (size < best_size_) return;
    auto members = to_members(r);
    const double score = mean_similarity(members, matrix_);
    if (size > best_size_ || score > best_score_ ||
        (score == best_score_ && members < best_members_)) {
      best_ = r;
      best_size_ = size;
      best_score_ = score;
      best_members_ = std::move(members);
    }
  }

  // Bron-Kerbosch with Tomita pivoting. Every maximum clique is maximal, so
  // all of them are visited; the bound is strict so equal-size ones survive.
  void expand(Bits r, int size, Bits p, Bits x) {
    if (!p) {
      if (!x) consider(r, size);
      return;
    }
    if (size + std::popcount(p) < best_size_) return;
    Bits px = p | x;
    int pivot = std::countr_zero(px);
    int most = -1;
    for (Bits scan = px; scan; scan &= scan - 1) {
      const int u = std::countr_zero(scan);
      const int c = std::popcount(p & rows_[u]);
      if (c > most) {
        most = c;
        pivot = u;
      }
    }
    for (Bits cand = p & ~rows_[pivot]; cand; cand &= cand - 1) {
      const int v = std::countr_zero(cand);
      const Bits bit = Bits{1} << v;
      expand(r | bit, size + 1, p & rows_[v], x & rows_[v]);
      p &= ~bit;
      x |= bit;
      if (size + std::popcount(p) < best_size_) return;
    }
  }

  const std::vector<Bits>& rows_;
  const SimilarityMatrix* matrix_;
  Bits best_ = 0;
  int best_size_ = 0;
  double best_score_ = 0.0;
  std::vector<std::size_t> best_members_;
};

std::vector<Bits> bit_rows(const SimilarityGraph& graph) {
  const std::size_t n = graph.size();
  if (n > kMaxCliqueUsers) {
    throw Error(ErrorKind::SizeLimitExceeded,
                fmt::format("exact clique search supports at most {} users, got {}",
                            kMaxCliqueUsers, n));
  }
  std::vector<Bits> rows(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (graph.adjacent(i, j)) rows[i] |= Bits{1} << j;
    }
  }
  return rows;
}

Bits all_vertices(std::size_t n) { return n == 64 ? ~Bits{0} : (Bits{1} << n) - 1; }

void check_matrix(const SimilarityGraph& graph, const SimilarityMatrix* matrix) {
  if (matrix && matrix->size() != graph.size()) {
    throw Error(ErrorKind::InvalidParams,
                fmt::format("matrix has {} users but the graph has {}", matrix->size(),
                            graph.size()));
  }
}

}  // namespace

Cluster max_clique(const SimilarityGraph& graph, const SimilarityMatrix* matrix) {
  const auto rows = bit_rows(graph);
  check_matrix(graph, matrix);
  Cluster c;
  if (graph.size() == 0) return c;
  c.members = to_members(CliqueSearch(rows, matrix).run(all_vertices(graph.size())));
  return c;
}

ClusteringResult clique_clustering(const SimilarityGraph& graph, const SimilarityMatrix* matrix,
                                   std::size_t relevant_min_size) {
  const auto rows = bit_rows(graph);
  check_matrix(graph, matrix);
  const std::size_t n = graph.size();
  ClusteringResult result;
  result.id = graph.id();
  result.begin_frame = graph.id();
  result.end_frame = graph.id() + 1;
  result.n = n;

  Bits remaining = all_vertices(n);
  auto has_edge = [&] {
    for (Bits scan = remaining; scan; scan &= scan - 1) {
      if (rows[std::countr_zero(scan)] & remaining) return true;
    }
    return false;
  };
  while (remaining && has_edge()) {
    std::vector<Bits> sub(n);
    for (std::size_t i = 0; i < n; ++i) sub[i] = rows[i] & remaining;
    const Bits clique = CliqueSearch(sub, matrix).run(remaining);
    result.clusters.push_back(Cluster{to_members(clique), true, false});
    remaining &= ~clique;
  }
  for (std::size_t v : to_members(remaining)) result.clusters.push_back(Cluster{{v}, true, false});
  for (auto& c : result.clusters) c.relevant = c.size() >= relevant_min_size;
  return result;
}

std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(std::size_t frame_count, double fps,
                                                              const ChunkSpec& spec) {
  spec.validate();
  if (!(fps > 0.0)) throw Error(ErrorKind::InvalidParams, "fps must be > 0");
  const auto len = static_cast<std::size_t>(std::max(1LL, std::llround(spec.window * fps)));
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t begin = 0; begin < frame_count; begin += len) {
    const std::size_t end = std::min(frame_count, begin + len);
    if (2 * (end - begin) < len) break;
    out.emplace_back(begin, end);
  }
  return out;
}

namespace {

std::size_t common_size(std::span<const SimilarityMatrix> frames) {
  if (frames.empty()) return 0;
  const std::size_t n = frames.front().size();
  for (const auto& m : frames) {
    if (m.size() != n) throw Error(ErrorKind::InvalidParams, "matrices differ in user count");
  }
  return n;
}

}  // namespace

SimilarityMatrix persistence_fraction(std::span<const SimilarityMatrix> frames, double threshold,
                                      std::int64_t id) {
  const std::size_t n = common_size(frames);
  const MetricId metric = frames.empty() ? MetricId::W1 : frames.front().metric();
  SimilarityMatrix out(id, n, metric);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      std::size_t valid = 0;
      std::size_t hits = 0;
      for (const auto& m : frames) {
        if (!m.valid(i, j)) continue;
        ++valid;
        if (m.value(i, j) >= threshold) ++hits;
      }
      if (valid) out.set(i, j, static_cast<double>(hits) / static_cast<double>(valid));
    }
  }
  return out;
}

SimilarityMatrix mean_matrix(std::span<const SimilarityMatrix> frames, std::int64_t id) {
  const std::size_t n = common_size(frames);
  const MetricId metric = frames.empty() ? MetricId::W1 : frames.front().metric();
  SimilarityMatrix out(id, n, metric);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double sum = 0.0;
      std::size_t valid = 0;
      for (const auto& m : frames) {
        if (!m.valid(i, j)) continue;
        sum += m.value(i, j);
        ++valid;
      }
      if (valid) out.set(i, j, sum / static_cast<double>(valid));
    }
  }
  return out;
}

namespace {
// 24 of 30 frames must count as 0.8 despite rounding.
constexpr double kFractionSlack = 1e-12;
}  // namespace

SimilarityGraph chunk_adjacency(std::span<const SimilarityMatrix> frames, double threshold,
                                const ChunkSpec& spec, std::int64_t id) {
  spec.validate();
  return build_adjacency(persistence_fraction(frames, threshold, id),
                         spec.persistence - kFractionSlack);
}

std::vector<ClusteringResult> cluster_matrices(std::span<const SimilarityMatrix> frames, double fps,
                                               double threshold,
                                               const std::optional<ChunkSpec>& spec,
                                               std::size_t relevant_min_size, unsigned threads) {
  common_size(frames);
  if (!spec) {
    std::vector<ClusteringResult> out(frames.size());
    parallel_for(frames.size(), threads, [&](std::size_t f) {
      out[f] = clique_clustering(build_adjacency(frames[f], threshold), &frames[f],
                                 relevant_min_size);
    });
    return out;
  }
  const auto ranges = chunk_ranges(frames.size(), fps, *spec);
  std::vector<ClusteringResult> out(ranges.size());
  parallel_for(ranges.size(), threads, [&](std::size_t c) {
    const auto [begin, end] = ranges[c];
    const auto window = frames.subspan(begin, end - begin);
    const auto id = static_cast<std::int64_t>(c);
    const SimilarityMatrix mean = mean_matrix(window, id);
    ClusteringResult r =
        clique_clustering(chunk_adjacency(window, threshold, *spec, id), &mean, relevant_min_size);
    r.chunk = true;
    r.begin_frame = static_cast<std::int64_t>(begin);
    r.end_frame = static_cast<std::int64_t>(end);
    out[c] = std::move(r);
  });
  return out;
}

std::vector<SimilarityMatrix> frame_matrices(const FeatureTable& table, const MetricConfig& config,
                                             unsigned threads) {
  std::vector<SimilarityMatrix> out(table.frame_count());
  parallel_for(out.size(), threads, [&](std::size_t f) { out[f] = table.matrix(f, config); });
  return out;
}

std::vector<ClusteringResult> cluster_over_time(const FeatureTable& table,
                                                const MetricConfig& config,
                                                const std::optional<ChunkSpec>& spec,
                                                std::size_t relevant_min_size, unsigned threads) {
  const auto matrices = frame_matrices(table, config, threads);
  return cluster_matrices(matrices, table.fps(), config.threshold, spec, relevant_min_size,
                          threads);
}

void write_clusters_csv(std::ostream& out, std::span<const ClusteringResult> results,
                        std::span<const std::string> user_ids) {
  out << "chunk_or_frame,user_id,cluster_id,cluster_size\n";
  for (const auto& r : results) {
    for (std::size_t c = 0; c < r.clusters.size(); ++c) {
      for (std::size_t m : r.clusters[c].members) {
        out << r.id << ',' << user_ids[m] << ',' << c << ',' << r.clusters[c].size() << '\n';
      }
    }
  }
}

void write_clusters_json(std::ostream& out, std::span<const ClusteringResult> results,
                         std::span<const std::string> user_ids) {
  nlohmann::ordered_json doc;
  doc["users"] = std::vector<std::string>(user_ids.begin(), user_ids.end());
  auto& list = doc["results"] = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json item;
    item[r.chunk ? "chunk" : "frame"] = r.id;
    item["begin_frame"] = r.begin_frame;
    item["end_frame"] = r.end_frame;
    auto& clusters = item["clusters"] = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < r.clusters.size(); ++c) {
      std::vector<std::string> members;
      for (std::size_t m : r.clusters[c].members) members.push_back(user_ids[m]);
      clusters.push_back({{"cluster_id", c},
                          {"size", r.clusters[c].size()},
                          {"relevant", r.clusters[c].relevant},
                          {"members", members}});
    }
    list.push_back(std::move(item));
  }
  out << doc.dump(2) << '\n';
}

ClusterTable read_clusters_csv(std::istream& in, std::size_t relevant_min_size) {
  std::string line;
  if (!std::getline(in, line) || csv::split(line) != std::vector<std::string>{
                                     "chunk_or_frame", "user_id", "cluster_id", "cluster_size"}) {
    throw Error(ErrorKind::Schema, "cluster CSV header mismatch");
  }
  struct Row {
    std::int64_t id;
    std::string user;
    std::size_t cluster;
    std::size_t size;
  };
  std::vector<Row> rows;
  std::map<std::string, std::size_t> users;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = csv::split(line);
    auto malformed = [&] {
      return Error(ErrorKind::Parse, fmt::format("cluster CSV line {}: malformed row", lineno));
    };
    if (f.size() != 4 || f[1].empty()) throw malformed();
    const long long id = csv::to_int(f[0]).value_or(-1);
    const long long cl = csv::to_int(f[2]).value_or(-1);
    const long long sz = csv::to_int(f[3]).value_or(-1);
    if (id < 0 || cl < 0 || sz < 1) throw malformed();
    rows.push_back({id, f[1], static_cast<std::size_t>(cl), static_cast<std::size_t>(sz)});
    users.emplace(f[1], 0);
  }
  ClusterTable table;
  for (auto& [name, index] : users) {
    index = table.user_ids.size();
    table.user_ids.push_back(name);
  }
  std::map<std::int64_t, ClusteringResult> by_id;
  for (const Row& row : rows) {
    auto& r = by_id[row.id];
    r.id = row.id;
    r.begin_frame = row.id;
    r.end_frame = row.id + 1;
    r.n = table.user_ids.size();
    if (r.clusters.size() <= row.cluster) r.clusters.resize(row.cluster + 1);
    r.clusters[row.cluster].members.push_back(users[row.user]);
  }
  for (auto& [id, r] : by_id) {
    for (auto& c : r.clusters) {
      std::sort(c.members.begin(), c.members.end());
      c.relevant = c.size() >= relevant_min_size;
    }
    table.results.push_back(std::move(r));
  }
  return table;
}

}  // namespace sixdof
