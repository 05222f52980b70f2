#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "sixdof/error.hpp"
#include "sixdof/evaluation.hpp"
#include "support.hpp"

using namespace sixdof;

namespace {

ClusteringResult result_of(std::size_t n, const std::vector<std::vector<std::size_t>>& groups,
                           std::size_t min_size = 3) {
  ClusteringResult r;
  r.n = n;
  for (const auto& g : groups) {
    Cluster c;
    c.members = g;
    c.relevant = g.size() >= min_size;
    r.clusters.push_back(c);
  }
  return r;
}

SimilarityMatrix random_overlap(testgen::Rng& rng, std::size_t n, std::int64_t frame = 0) {
  SimilarityMatrix m(frame, n, MetricId::Overlap);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, testgen::uniform(rng));
  return m;
}

SimilarityMatrix permuted(const SimilarityMatrix& m, const std::vector<std::size_t>& perm) {
  SimilarityMatrix out(m.frame(), m.size(), m.metric());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j)
      if (m.valid(i, j)) out.set(perm[i], perm[j], m.value(i, j));
  return out;
}

std::vector<std::optional<double>> series(std::initializer_list<double> xs) {
  return {xs.begin(), xs.end()};
}

}  // namespace

TEST_CASE("overlap_per_cluster: examples") {
  SimilarityMatrix m(0, 4, MetricId::Overlap);
  m.set(0, 1, 0.84);
  m.set(1, 2, 0.8);
  m.set(1, 3, 0.9);
  m.set(2, 3, 1.0);
  CHECK(*overlap_per_cluster(Cluster{{0, 1}}, m) == doctest::Approx(0.84));
  CHECK(*overlap_per_cluster(Cluster{{1, 2, 3}}, m) == doctest::Approx(0.9));
  CHECK_FALSE(overlap_per_cluster(Cluster{{2}}, m));
  m.invalidate(0, 1);
  CHECK_FALSE(overlap_per_cluster(Cluster{{0, 1}}, m));
}

TEST_CASE("relevant_population: examples") {
  std::vector<std::vector<std::size_t>> groups;
  std::size_t next = 0;
  for (std::size_t size : {8u, 3u, 2u, 1u}) {
    std::vector<std::size_t> g(size);
    std::iota(g.begin(), g.end(), next);
    next += size;
    groups.push_back(g);
  }
  CHECK(relevant_population(result_of(14, groups), 3) == doctest::Approx(11.0 / 14.0));
  CHECK(relevant_population(result_of(3, {{0}, {1}, {2}}), 3) == 0.0);
  CHECK(relevant_population(result_of(5, {{0, 1, 2, 3, 4}}), 3) == 1.0);
}

TEST_CASE("precision: examples") {
  SimilarityMatrix labels(0, 4, MetricId::Overlap);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) labels.set(i, j, 0.9);
  CHECK(*precision(result_of(4, {{0, 1, 2, 3}}), labels, 0.75) == 1.0);

  // pairs (0,1) and (2,3) above, (0,2) and (1,3) below
  SimilarityMatrix half(0, 4, MetricId::Overlap);
  half.set(0, 1, 0.9);
  half.set(2, 3, 0.8);
  half.set(0, 2, 0.1);
  half.set(1, 3, 0.2);
  CHECK(*precision(result_of(4, {{0, 1}, {2, 3}, }), half, 0.75) == 1.0);
  CHECK(*precision(result_of(4, {{0, 2}, {1, 3}}), half, 0.75) == 0.0);
  SimilarityMatrix mixed(0, 4, MetricId::Overlap);
  mixed.set(0, 1, 0.9);
  mixed.set(2, 3, 0.1);
  CHECK(*precision(result_of(4, {{0, 1}, {2, 3}}), mixed, 0.75) == 0.5);
  CHECK_FALSE(precision(result_of(3, {{0}, {1}, {2}}), labels, 0.75));
}

TEST_CASE("aggregate: mean and population std") {
  const auto c = series({0.4, 0.4, 0.4});
  CHECK(*aggregate(c).mean == doctest::Approx(0.4));
  CHECK(aggregate(c).std == doctest::Approx(0.0));
  const auto two = series({0.6, 0.8});
  CHECK(*aggregate(two).mean == doctest::Approx(0.7));
  CHECK(aggregate(two).std == doctest::Approx(0.1));

  std::vector<std::optional<double>> gaps = {0.5, std::nullopt, 1.0};
  const auto g = aggregate(gaps);
  CHECK(*g.mean == doctest::Approx(0.75));
  CHECK(g.valid == 2);
  CHECK(g.invalid == 1);
  std::vector<std::optional<double>> none = {std::nullopt};
  CHECK_FALSE(aggregate(none).mean);
  CHECK_THROWS_AS(aggregate(std::vector<std::optional<double>>{}), Error);
}

TEST_CASE("evaluate: clustering under overlap adjacency has precision 1") {
  testgen::Rng rng(1);
  const EvaluationOptions opt{0.75, 3};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + testgen::pick(rng, 14);
    const auto o = random_overlap(rng, n);
    const auto r = clique_clustering(build_adjacency(o, opt.overlap_threshold), &o, 3);
    const auto perf = evaluate_frame(r, o, opt);
    if (perf.precision) CHECK(*perf.precision == 1.0);
    for (const auto& c : r.clusters) {
      if (const auto ok = overlap_per_cluster(c, o)) CHECK(*ok >= opt.overlap_threshold);
    }
  }
}

TEST_CASE("evaluate: chunk precision of overlap clustering is 1") {
  testgen::Rng rng(2);
  const ChunkSpec spec{1.0, 0.8};
  const EvaluationOptions opt{0.75, 3};
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6;
    std::vector<SimilarityMatrix> frames;
    for (std::int64_t f = 0; f < 60; ++f) {
      auto m = random_overlap(rng, n, f);
      // a persistent group among the first three users
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) m.set(i, j, testgen::uniform(rng, 0.7, 1.0));
      frames.push_back(m);
    }
    const auto results = cluster_matrices(frames, 30.0, opt.overlap_threshold, spec, 3, 1);
    const auto perf = evaluate_results(results, frames, spec, opt);
    REQUIRE(perf.size() == 2);
    for (const auto& p : perf) {
      if (p.precision) CHECK(*p.precision == 1.0);
    }
  }
}

TEST_CASE("evaluate: population never grows with min_size") {
  testgen::Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto o = random_overlap(rng, 12);
    const auto r = clique_clustering(build_adjacency(o, 0.4), &o, 3);
    double prev = 2.0;
    for (std::size_t k = 1; k <= 13; ++k) {
      const double pop = relevant_population(r, k);
      CHECK(pop <= prev);
      prev = pop;
    }
    CHECK(relevant_population(r, 1) == 1.0);
  }
}

TEST_CASE("evaluate: invariant under relabelling users and clusters") {
  testgen::Rng rng(4);
  const EvaluationOptions opt{0.75, 3};
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 10;
    const auto o = random_overlap(rng, n);
    const auto labels = random_overlap(rng, n);
    const auto r = clique_clustering(build_adjacency(o, 0.3), &o, 3);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    ClusteringResult moved = r;
    for (auto& c : moved.clusters) {
      for (auto& m : c.members) m = perm[m];
      std::sort(c.members.begin(), c.members.end());
    }
    std::shuffle(moved.clusters.begin(), moved.clusters.end(), rng);

    const auto a = evaluate_frame(r, labels, opt);
    const auto b = evaluate_frame(moved, permuted(labels, perm), opt);
    CHECK(a.relevant_population == b.relevant_population);
    CHECK(a.n_relevant_clusters == b.n_relevant_clusters);
    REQUIRE(a.precision.has_value() == b.precision.has_value());
    if (a.precision) CHECK(*a.precision == doctest::Approx(*b.precision));
    REQUIRE(a.overlap_ratio.has_value() == b.overlap_ratio.has_value());
    if (a.overlap_ratio) CHECK(*a.overlap_ratio == doctest::Approx(*b.overlap_ratio));
  }
}

TEST_CASE("evaluate: overlap ratio is the mean over relevant clusters") {
  SimilarityMatrix o(0, 7, MetricId::Overlap);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = i + 1; j < 7; ++j) o.set(i, j, 0.1);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) o.set(i, j, 0.9);
  for (std::size_t i = 3; i < 6; ++i)
    for (std::size_t j = i + 1; j < 6; ++j) o.set(i, j, 0.6);
  const auto r = result_of(7, {{0, 1, 2}, {3, 4, 5}, {6}});
  const auto perf = evaluate_frame(r, o, {0.75, 3});
  CHECK(*perf.overlap_ratio == doctest::Approx(0.75));
  CHECK(perf.relevant_population == doctest::Approx(6.0 / 7.0));
  CHECK(*perf.precision == doctest::Approx(0.5));
  CHECK(perf.n_relevant_clusters == 2);
  CHECK_FALSE(evaluate_frame(result_of(7, {{0}, {1}, {2}, {3}, {4}, {5}, {6}}), o, {0.75, 3})
                  .overlap_ratio);
}

TEST_CASE("summary: all-contents row averages the per-content means") {
  auto row = [](const std::string& id, double o, double p, double q) {
    SummaryRow r{id, "w7", {}};
    r.summary.overlap_ratio.mean = o;
    r.summary.relevant_population.mean = p;
    r.summary.precision.mean = q;
    return r;
  };
  const std::vector<SummaryRow> rows = {row("a", 0.6, 0.8, 0.4), row("b", 0.8, 1.0, 0.6)};
  const auto all = all_contents_row(rows, "w7");
  CHECK(all.content_id == "All");
  CHECK(*all.summary.overlap_ratio.mean == doctest::Approx(0.7));
  CHECK(all.summary.overlap_ratio.std == doctest::Approx(0.1));
  CHECK(*all.summary.precision.mean == doctest::Approx(0.5));

  std::ostringstream csv, table;
  write_summary_csv(csv, rows);
  write_summary_table(table, rows);
  CHECK(csv.str().rfind("content,metric,overlap_mean", 0) == 0);
  CHECK(table.str().find("±") != std::string::npos);
}
