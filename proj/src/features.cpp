#include "sixdof/features.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <mutex>

#include "sixdof/error.hpp"
#include "sixdof/parallel.hpp"

namespace sixdof {
namespace {

std::uint64_t fingerprint(const std::vector<Point3>& pts) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (const Point3& p : pts) {
    for (double c : {p.x, p.y, p.z}) {
      std::uint64_t bits;
      std::memcpy(&bits, &c, sizeof bits);
      h = (h ^ bits) * 1099511628211ull;
    }
  }
  return h ^ pts.size();
}

// Clouds repeat across frames for static content; build each graph once.
class GraphCache {
 public:
  explicit GraphCache(int k) : k_(k) {}

  std::shared_ptr<const SurfaceGraph> get(const PointCloudFrame& cloud) {
    const std::uint64_t key = fingerprint(cloud.points);
    {
      std::lock_guard lock(mutex_);
      for (const auto& g : entries_[key]) {
        if (std::equal(g->points().begin(), g->points().end(), cloud.points.begin(),
                       cloud.points.end())) {
          return g;
        }
      }
    }
    auto graph = std::make_shared<const SurfaceGraph>(build_surface_graph(cloud, k_));
    std::lock_guard lock(mutex_);
    entries_[key].push_back(graph);
    return graph;
  }

 private:
  int k_;
  std::mutex mutex_;
  std::map<std::uint64_t, std::vector<std::shared_ptr<const SurfaceGraph>>> entries_;
};

}  // namespace

FeatureTable::FeatureTable(std::string content_id, std::vector<std::string> user_ids, double fps,
                           std::vector<FrameFeatures> frames, bool has_overlap, bool has_geodesic)
    : content_id_(std::move(content_id)),
      user_ids_(std::move(user_ids)),
      fps_(fps),
      frames_(std::move(frames)),
      has_overlap_(has_overlap),
      has_geodesic_(has_geodesic) {}

SimilarityMatrix FeatureTable::matrix(std::size_t f, MetricId id, const RegulatorSet& reg) const {
  if (id == MetricId::Overlap) return overlap_matrix(f);
  if (needs_geodesic(id) && !has_geodesic_) {
    throw Error(ErrorKind::MissingGraph,
                fmt::format("{} needs geodesics, which were not computed", to_string(id)));
  }
  const std::size_t n = user_count();
  const FrameFeatures& ff = frames_[f];
  SimilarityMatrix m(ff.frame, n, id);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      ++m.evaluations;
      const PairFeatures& pf = ff.pairs[pair_index(n, i, j)];
      if (metric_defined(id, pf)) m.set(i, j, metric_from_features(id, reg, pf));
    }
  }
  return m;
}

SimilarityMatrix FeatureTable::overlap_matrix(std::size_t f) const {
  if (!has_overlap_) throw Error(ErrorKind::InvalidParams, "overlap was not computed");
  const std::size_t n = user_count();
  const FrameFeatures& ff = frames_[f];
  SimilarityMatrix m(ff.frame, n, MetricId::Overlap);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      ++m.evaluations;
      if (const auto& o = ff.overlap[pair_index(n, i, j)]) m.set(i, j, *o);
    }
  }
  return m;
}

FeatureTable compute_features(const SessionDataset& dataset, const FeatureOptions& options) {
  options.frustum.validate();
  const std::size_t n = dataset.user_count();
  const std::size_t total = dataset.frame_count();
  for (const auto& tr : dataset.trajectories) {
    if (tr.samples.size() != total) {
      throw Error(ErrorKind::Precondition, "dataset trajectories are not aligned to one clock");
    }
  }
  const std::size_t last = std::min(options.frame_end, total);
  const std::size_t first = std::min(options.frame_begin, last);
  const std::size_t frames = last - first;
  const bool need_cloud = options.overlap || options.geodesic;
  if (need_cloud && !dataset.clouds) {
    throw Error(ErrorKind::MissingFrame, "dataset has no content frames");
  }
  if (need_cloud && !dataset.clouds->loops() && last > dataset.clouds->size()) {
    throw Error(ErrorKind::MissingFrame,
                fmt::format("trajectories span {} frames but content '{}' has {}", last,
                            dataset.content_id, dataset.clouds->size()));
  }

  GraphCache graphs(options.graph_k);
  const std::size_t n_pairs = n < 2 ? 0 : n * (n - 1) / 2;
  std::vector<FrameFeatures> out(frames);

  parallel_for(frames, options.threads, [&](std::size_t slot) {
    const std::size_t f = first + slot;
    FrameFeatures& ff = out[slot];
    ff.frame = static_cast<std::int64_t>(f);
    ff.pairs.resize(n_pairs);
    std::vector<const TrajectorySample*> s(n);
    for (std::size_t u = 0; u < n; ++u) s[u] = &dataset.trajectories[u].samples[f];

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        ff.pairs[pair_index(n, i, j)] = pair_features(*s[i], *s[j], nullptr);
      }
    }
    if (!need_cloud || n < 2) return;
    const CloudPtr cloud = dataset.clouds->at(static_cast<std::int64_t>(f));

    if (options.overlap) {
      ff.overlap.resize(n_pairs);
      std::vector<ViewportSet> sets(n);
      for (std::size_t u = 0; u < n; ++u) {
        if (!s[u]->gap) sets[u] = viewport_set(build_frustum(s[u]->pose(), options.frustum), *cloud);
      }
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (s[i]->gap || s[j]->gap) continue;
          ff.overlap[pair_index(n, i, j)] = overlap_ratio(sets[i], sets[j]);
        }
      }
    }

    if (options.geodesic) {
      std::vector<std::size_t> on;
      for (std::size_t u = 0; u < n; ++u) {
        if (s[u]->on_content() && s[u]->p) on.push_back(u);
      }
      if (on.size() < 2) return;
      const auto graph = graphs.get(*cloud);
      std::vector<std::uint32_t> vertex(n, 0);
      for (std::size_t u : on) vertex[u] = graph->snap(*s[u]->p);
      for (std::size_t a = 0; a + 1 < on.size(); ++a) {
        std::vector<std::uint32_t> targets;
        for (std::size_t b = a + 1; b < on.size(); ++b) targets.push_back(vertex[on[b]]);
        const auto d = geodesic_distances(*graph, vertex[on[a]], targets);
        for (std::size_t b = a + 1; b < on.size(); ++b) {
          PairFeatures& pf = ff.pairs[pair_index(n, on[a], on[b])];
          if (!pf.has_pr) continue;
          pf.gp = d[b - a - 1];
          pf.has_gp = true;
        }
      }
    }
  });

  std::vector<std::string> ids;
  ids.reserve(n);
  for (const auto& tr : dataset.trajectories) ids.push_back(tr.user_id);
  return FeatureTable(dataset.content_id, std::move(ids), dataset.fps, std::move(out),
                      options.overlap, options.geodesic);
}

}  // namespace sixdof
