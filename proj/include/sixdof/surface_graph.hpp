#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sixdof/geometry.hpp"
#include "sixdof/kdtree.hpp"

namespace sixdof {

struct Edge {
  std::uint32_t to;
  double length;
};

// Symmetric k-nearest-neighbour graph over a point cloud, with Euclidean edge
// lengths. Owns a copy of the points so projected viewport centres can be
// snapped onto vertices. Move-only: the spatial index refers to the owned points.
class SurfaceGraph {
 public:
  SurfaceGraph(std::vector<Point3> points, std::vector<std::vector<Edge>> adjacency, int k);
  SurfaceGraph(const SurfaceGraph&) = delete;
  SurfaceGraph& operator=(const SurfaceGraph&) = delete;
  SurfaceGraph(SurfaceGraph&&) = default;
  SurfaceGraph& operator=(SurfaceGraph&&) = default;

  int k() const { return k_; }
  std::size_t size() const { return points_.size(); }
  std::span<const Point3> points() const { return points_; }
  std::span<const Edge> neighbours(std::uint32_t v) const {
    return {edges_.data() + offsets_[v], edges_.data() + offsets_[v + 1]};
  }

  // Closest vertex to an arbitrary point.
  std::uint32_t snap(Point3 p) const { return index_.nearest(p); }

 private:
  std::vector<Point3> points_;
  std::vector<std::size_t> offsets_;
  std::vector<Edge> edges_;
  KdTree index_;
  int k_;
};

SurfaceGraph build_surface_graph(const PointCloudFrame& cloud, int k);

// Shortest-path length; +infinity across components. Symmetric bit-for-bit.
double geodesic_distance(const SurfaceGraph& graph, std::uint32_t a, std::uint32_t b);

// Both endpoints are snapped to their nearest vertices first.
double geodesic_distance(const SurfaceGraph& graph, Point3 a, Point3 b);

// Distances from `source` to each of `targets` (+infinity when unreachable).
// Stops as soon as every target is settled.
std::vector<double> geodesic_distances(const SurfaceGraph& graph, std::uint32_t source,
                                       std::span<const std::uint32_t> targets);

}  // namespace sixdof
