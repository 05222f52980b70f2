#include "sixdof/surface_graph.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <queue>

#include "sixdof/error.hpp"

namespace sixdof {

SurfaceGraph::SurfaceGraph(std::vector<Point3> points, std::vector<std::vector<Edge>> adjacency,
                           int k)
    : points_(std::move(points)), k_(k) {
  offsets_.reserve(adjacency.size() + 1);
  offsets_.push_back(0);
  for (const auto& list : adjacency) {
    edges_.insert(edges_.end(), list.begin(), list.end());
    offsets_.push_back(edges_.size());
  }
  index_ = KdTree(points_);
}

SurfaceGraph build_surface_graph(const PointCloudFrame& cloud, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidParams, fmt::format("graph k must be >= 1, got {}", k));
  if (cloud.points.empty()) throw Error(ErrorKind::InvalidParams, "cannot build graph of empty cloud");

  const std::vector<Point3>& pts = cloud.points;
  const KdTree tree(pts);
  std::vector<std::vector<Edge>> adj(pts.size());
  for (std::uint32_t i = 0; i < pts.size(); ++i) {
    for (const auto& [j, d] : tree.knn(pts[i], static_cast<std::size_t>(k), i)) {
      adj[i].push_back({j, d});
      adj[j].push_back({i, d});
    }
  }
  // Union symmetrization leaves duplicates where i and j picked each other.
  for (auto& list : adj) {
    std::sort(list.begin(), list.end(),
              [](const Edge& a, const Edge& b) { return a.to < b.to; });
    list.erase(std::unique(list.begin(), list.end(),
                           [](const Edge& a, const Edge& b) { return a.to == b.to; }),
               list.end());
  }
  // Recompute lengths from the endpoints so both directions carry identical weights.
  for (std::uint32_t i = 0; i < adj.size(); ++i) {
    for (Edge& e : adj[i]) e.length = euclidean_distance(pts[std::min(i, e.to)], pts[std::max(i, e.to)]);
  }
  return SurfaceGraph(pts, std::move(adj), k);
}

std::vector<double> geodesic_distances(const SurfaceGraph& graph, std::uint32_t source,
                                       std::span<const std::uint32_t> targets) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = graph.size();
  if (source >= n) throw Error(ErrorKind::InvalidParams, "geodesic source out of range");
  for (std::uint32_t t : targets) {
    if (t >= n) throw Error(ErrorKind::InvalidParams, "geodesic target out of range");
  }

  std::vector<double> dist(n, inf);
  std::vector<char> settled(n, 0);
  std::vector<char> is_target(n, 0);
  std::size_t remaining = 0;
  for (std::uint32_t t : targets) {
    if (!is_target[t]) {
      is_target[t] = 1;
      ++remaining;
    }
  }

  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty() && remaining > 0) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (settled[v]) continue;
    settled[v] = 1;
    if (is_target[v]) --remaining;
    for (const Edge& e : graph.neighbours(v)) {
      const double nd = d + e.length;
      if (nd < dist[e.to]) {
        dist[e.to] = nd;
        heap.push({nd, e.to});
      }
    }
  }

  std::vector<double> out;
  out.reserve(targets.size());
  for (std::uint32_t t : targets) out.push_back(settled[t] ? dist[t] : inf);
  return out;
}

double geodesic_distance(const SurfaceGraph& graph, std::uint32_t a, std::uint32_t b) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = graph.size();
  if (a >= n || b >= n) throw Error(ErrorKind::InvalidParams, "geodesic vertex out of range");
  if (a == b) return 0.0;
  const std::uint32_t src = std::min(a, b);
  const std::uint32_t dst = std::max(a, b);

  // A*: edge weights are Euclidean, so the straight-line distance to `dst` is
  // a consistent lower bound. Stale heap entries are skipped rather than
  // trusting a settled flag, which keeps the result exact under rounding.
  const auto pts = graph.points();
  const Point3 goal = pts[dst];
  std::vector<double> dist(n, inf);
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[src] = 0.0;
  heap.push({euclidean_distance(pts[src], goal), src});
  while (!heap.empty()) {
    const auto [f, v] = heap.top();
    heap.pop();
    if (v == dst) return dist[dst];
    if (f > dist[v] + euclidean_distance(pts[v], goal)) continue;
    for (const Edge& e : graph.neighbours(v)) {
      const double nd = dist[v] + e.length;
      if (nd < dist[e.to]) {
        dist[e.to] = nd;
        heap.push({nd + euclidean_distance(pts[e.to], goal), e.to});
      }
    }
  }
  return inf;
}

double geodesic_distance(const SurfaceGraph& graph, Point3 a, Point3 b) {
  return geodesic_distance(graph, graph.snap(a), graph.snap(b));
}

}  // namespace sixdof
