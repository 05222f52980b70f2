#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sixdof/geometry.hpp"

namespace sixdof {

struct BenchOptions {
  std::size_t points = 100000;
  std::size_t pairs = 10;   // user pairs per frame
  std::size_t frames = 5;
  std::size_t repeats = 3;  // for the coefficient of variation
  std::uint64_t seed = 0;
  int graph_k = 8;
  FrustumParams frustum;
};

struct BenchRow {
  std::string name;            // "overlap" or a proxy metric
  double seconds = 0.0;        // mean wall time per pair per frame
  double cv = 0.0;             // across repeats
  std::optional<double> speedup;  // overlap time / this time
  std::size_t evaluations = 0;    // per repeat
};

struct BenchReport {
  std::size_t points = 0;
  std::size_t pair_frames = 0;
  double graph_build_seconds = 0.0;  // one-off per cloud, not in per-pair times
  std::vector<BenchRow> rows;        // empty when there is nothing to time
};

// Times the exact overlap (two frustum cullings plus set overlap) against each
// proxy metric on a synthetic sphere cloud with random viewers.
BenchReport run_bench(const BenchOptions& options);

// metric,seconds_per_pair_frame,cv,speedup,evaluations
void write_bench_csv(std::ostream& out, const BenchReport& report);

}  // namespace sixdof
