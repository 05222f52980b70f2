#include "sixdof/bench.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>

#include "sixdof/csv.hpp"
#include "sixdof/error.hpp"
#include "sixdof/metrics.hpp"
#include "sixdof/synth.hpp"

namespace sixdof {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

TrajectorySample random_viewer(SplitMix64& rng, const PointCloudFrame& cloud, double cone) {
  for (;;) {
    const double azimuth = 2.0 * std::numbers::pi * rng.uniform();
    const double radius = 1.5 + 1.5 * rng.uniform();
    TrajectorySample s;
    s.x = {radius * std::sin(azimuth), 0.5 + 0.4 * rng.uniform(), radius * std::cos(azimuth)};
    Point3 dir = cloud.centroid - s.x;
    dir = dir + 0.15 * norm(dir) * Point3{rng.normal(), rng.normal(), rng.normal()};
    s.orientation = Quaternion::look_along(dir);
    if (auto hit = ray_cast_center(s.pose(), cloud, cone)) {
      s.p = hit->p;
      s.r = hit->r;
      s.off_content = false;
      return s;
    }
  }
}

struct Stats {
  double mean = 0.0;
  double cv = 0.0;
};

Stats stats_of(const std::vector<double>& v) {
  Stats s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.cv = s.mean > 0.0 ? std::sqrt(ss / static_cast<double>(v.size())) / s.mean : 0.0;
  return s;
}

}  // namespace

BenchReport run_bench(const BenchOptions& options) {
  options.frustum.validate();
  if (options.points == 0) throw Error(ErrorKind::InvalidParams, "bench needs at least one point");
  if (options.repeats == 0) throw Error(ErrorKind::InvalidParams, "bench needs at least one repeat");
  BenchReport report;
  report.points = options.points;
  report.pair_frames = options.pairs * options.frames;
  if (report.pair_frames == 0) return report;

  SynthScenario scenario;
  scenario.seed = options.seed;
  scenario.points_per_frame = options.points;
  scenario.n_frames = 1;
  scenario.groups = {GroupSpec{}};
  const PointCloudFrame cloud = generate_cloud_frame(scenario, 0);

  const auto build_start = Clock::now();
  const SurfaceGraph graph = build_surface_graph(cloud, options.graph_k);
  report.graph_build_seconds = seconds_since(build_start);

  SplitMix64 rng(derive_seed(options.seed, 0xBE4C));
  std::vector<std::pair<TrajectorySample, TrajectorySample>> pairs;
  for (std::size_t k = 0; k < report.pair_frames; ++k) {
    auto a = random_viewer(rng, cloud, 0.035);
    auto b = random_viewer(rng, cloud, 0.035);
    pairs.emplace_back(a, b);
  }

  volatile double sink = 0.0;
  auto time_rows = [&](const std::string& name, std::size_t passes, auto&& eval) {
    std::vector<double> per_pair;
    for (std::size_t rep = 0; rep < options.repeats; ++rep) {
      const auto start = Clock::now();
      double acc = 0.0;
      for (std::size_t pass = 0; pass < passes; ++pass) {
        for (const auto& [a, b] : pairs) acc += eval(a, b);
      }
      const double elapsed = seconds_since(start);
      sink = sink + acc;
      per_pair.push_back(elapsed / static_cast<double>(passes * pairs.size()));
    }
    const Stats s = stats_of(per_pair);
    report.rows.push_back({name, s.mean, s.cv, std::nullopt, passes * pairs.size()});
  };

  time_rows("overlap", 1, [&](const TrajectorySample& a, const TrajectorySample& b) {
    const auto sa = viewport_set(build_frustum(a.pose(), options.frustum), cloud);
    const auto sb = viewport_set(build_frustum(b.pose(), options.frustum), cloud);
    return overlap_ratio(sa, sb).value_or(0.0);
  });

  for (MetricId id : kProxyMetrics) {
    const RegulatorSet reg = default_config(id).regulators;
    // Cheap kernels are repeated so the clock sees well over a millisecond.
    const std::size_t passes =
        needs_geodesic(id) ? 1 : std::max<std::size_t>(1, 200000 / pairs.size());
    time_rows(std::string(to_string(id)), passes,
              [&](const TrajectorySample& a, const TrajectorySample& b) {
                return metric_value(id, reg, a, b, &graph);
              });
  }
  const double oracle = report.rows.front().seconds;
  for (auto& row : report.rows) {
    if (row.seconds > 0.0) row.speedup = oracle / row.seconds;
  }
  return report;
}

void write_bench_csv(std::ostream& out, const BenchReport& report) {
  out << "metric,seconds_per_pair_frame,cv,speedup,evaluations\n";
  for (const auto& r : report.rows) {
    out << r.name << ',' << csv::fmt_double(r.seconds) << ',' << csv::fmt_double(r.cv) << ','
        << (r.speedup ? csv::fmt_double(*r.speedup) : "") << ',' << r.evaluations << '\n';
  }
}

}  // namespace sixdof
