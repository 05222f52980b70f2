#include "sixdof/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

namespace sixdof {
namespace {

constexpr std::uint32_t kLeafSize = 16;

double coord(Point3 p, int axis) { return axis == 0 ? p.x : (axis == 1 ? p.y : p.z); }

double squared(Point3 a, Point3 b) {
  const Point3 d = a - b;
  return dot(d, d);
}

// (squared distance, index): ordered so the heap top is the current worst.
using Candidate = std::pair<double, std::uint32_t>;

}  // namespace

KdTree::KdTree(std::span<const Point3> points) : points_(points), order_(points.size()) {
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 1);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Point3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
  Point3 hi = -1.0 * lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    const Point3 p = points_[order_[i]];
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const Point3 ext = hi - lo;
  int axis = 0;
  if (ext.y > ext.x && ext.y >= ext.z) axis = 1;
  else if (ext.z > ext.x && ext.z > ext.y) axis = 2;
  if (std::max({ext.x, ext.y, ext.z}) == 0.0) return id;  // all duplicates

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = coord(points_[a], axis), cb = coord(points_[b], axis);
                     return ca < cb || (ca == cb && a < b);
                   });
  const double split = coord(points_[order_[mid]], axis);
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.axis = static_cast<std::uint8_t>(axis);
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

std::vector<std::pair<std::uint32_t, double>> KdTree::knn(Point3 query, std::size_t k,
                                                          std::int64_t exclude) const {
  std::vector<std::pair<std::uint32_t, double>> out;
  if (k == 0 || nodes_.empty()) return out;

  std::priority_queue<Candidate> heap;
  auto worst = [&] {
    return heap.size() < k ? Candidate{std::numeric_limits<double>::infinity(), 0u}
                           : heap.top();
  };

  // Depth-first, near child first; a far child is opened only while its splitting
  // plane is within the current worst distance.
  struct Pending {
    std::int32_t node;
    double plane_d2;
  };
  std::vector<Pending> pending{{0, 0.0}};
  while (!pending.empty()) {
    const Pending cur = pending.back();
    pending.pop_back();
    if (cur.plane_d2 > worst().first) continue;
    const Node& node = nodes_[static_cast<std::size_t>(cur.node)];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        if (static_cast<std::int64_t>(idx) == exclude) continue;
        const Candidate c{squared(points_[idx], query), idx};
        if (heap.size() < k) {
          heap.push(c);
        } else if (c < heap.top()) {
          heap.pop();
          heap.push(c);
        }
      }
      continue;
    }
    const double diff = coord(query, node.axis) - node.split;
    const std::int32_t near_child = diff < 0.0 ? node.left : node.right;
    const std::int32_t far_child = diff < 0.0 ? node.right : node.left;
    // Points equal to the split value may sit on either side.
    pending.push_back({far_child, diff * diff});
    pending.push_back({near_child, 0.0});
  }

  out.reserve(heap.size());
  while (!heap.empty()) {
    out.emplace_back(heap.top().second, std::sqrt(heap.top().first));
    heap.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::uint32_t KdTree::nearest(Point3 query) const {
  const auto hits = knn(query, 1);
  return hits.empty() ? 0u : hits.front().first;
}

}  // namespace sixdof
