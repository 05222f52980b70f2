#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sixdof/geometry.hpp"

namespace sixdof {

// Static 3-d tree over a borrowed point array. The points must outlive the tree.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Point3> points);

  // Up to k (index, distance) pairs sorted by distance then index; `exclude` is skipped.
  std::vector<std::pair<std::uint32_t, double>> knn(Point3 query, std::size_t k,
                                                    std::int64_t exclude = -1) const;

  // Index of the closest point (smallest index on ties).
  std::uint32_t nearest(Point3 query) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint8_t axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::span<const Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace sixdof
