#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

#include "commands.hpp"
#include "sixdof/error.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 2, kData = 3, kCompute = 4 };

}  // namespace

int main(int argc, char** argv) {
  using namespace sixdof::cli;
  CLI::App app{"6-DoF viewer similarity, clustering and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Global g;
  app.add_option("--manifest", g.manifest, "Manifest JSON");
  app.add_option("--calibration", g.calibration, "Calibration JSON overriding thresholds");
  app.add_option("--seed", g.seed, "Seed for all randomness");
  app.add_option("--threads", g.threads, "Worker threads (0: all cores)");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--overlap-threshold", g.overlap_threshold, "O_th for labels and precision");
  app.add_option("--target-tpr", g.target_tpr, "TPR floor for threshold selection");
  app.add_option("--relevant-min-size", g.relevant_min_size, "Smallest relevant cluster");
  app.add_option("--window", g.window, "Chunk window in seconds");
  app.add_option("--persistence", g.persistence, "Fraction of valid frames an edge must hold");

  FrameRange frames;
  std::vector<std::string> metrics;
  bool per_frame = false;

  auto* overlap = app.add_subcommand("overlap", "Exact overlap matrices per frame");
  overlap->add_option("--frames", frames.spec, "Frame range A:B (end exclusive)");

  auto* metric_cmd = app.add_subcommand("metrics", "Proxy similarity matrices per frame");
  metric_cmd->add_option("--metric", metrics, "Metrics (default w1..w8)")->delimiter(',');
  metric_cmd->add_option("--frames", frames.spec, "Frame range A:B (end exclusive)");

  auto* calibrate = app.add_subcommand("calibrate", "ROC curves and S_th per metric");
  calibrate->add_option("--metric", metrics, "Metrics (default w1..w8)")->delimiter(',');

  AblateArgs ablate_args;
  auto* ablate = app.add_subcommand("ablate", "Regulator grid search");
  ablate->add_option("--metric", ablate_args.metrics, "Metrics (default w1..w8)")->delimiter(',');
  ablate->add_option("--grid", ablate_args.grid, "Grid values")->delimiter(',');
  ablate->add_option("--fix-alpha", ablate_args.fix_alpha, "Hold alpha fixed");
  ablate->add_option("--fix-beta", ablate_args.fix_beta, "Hold beta fixed");
  ablate->add_option("--fix-gamma", ablate_args.fix_gamma, "Hold gamma fixed");

  auto* cluster = app.add_subcommand("cluster", "Clique clustering per chunk or frame");
  cluster->add_option("--metric", metrics, "Metrics (default w7)")->delimiter(',');
  cluster->add_flag("--per-frame", per_frame, "Cluster every frame instead of chunks");

  auto* evaluate = app.add_subcommand("evaluate", "Cluster quality summary tables");
  evaluate->add_option("--metric", metrics, "Metrics (default w1..w8 and overlap)")
      ->delimiter(',');
  evaluate->add_flag("--per-frame", per_frame, "Score every frame instead of chunks");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset with a manifest");
  synth->add_option("--scenario", synth_args.scenario, "Scenario JSON");
  synth->add_option("--preset", synth_args.preset, "Named scenario (planted-orbits)");
  synth->add_option("--format", synth_args.format, "PLY encoding: binary or ascii")
      ->capture_default_str();

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Time exact overlap against the proxies");
  bench->add_option("--points", bench_args.points, "Cloud size")->capture_default_str();
  bench->add_option("--pairs", bench_args.pairs, "User pairs per frame")->capture_default_str();
  bench->add_option("--frames", bench_args.frames, "Frames")->capture_default_str();
  bench->add_option("--repeats", bench_args.repeats, "Repeated runs")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*overlap) return cmd_overlap(g, frames);
    if (*metric_cmd) return cmd_metrics(g, metrics, frames);
    if (*calibrate) return cmd_calibrate(g, metrics);
    if (*ablate) return cmd_ablate(g, ablate_args);
    if (*cluster) return cmd_cluster(g, metrics, per_frame);
    if (*evaluate) return cmd_evaluate(g, metrics, per_frame);
    if (*synth) return cmd_synth(g, synth_args);
    if (*bench) return cmd_bench(g, bench_args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const sixdof::Error& e) {
    std::cerr << fmt::format("error ({}): {}\n", sixdof::to_string(e.kind()), e.what());
    return sixdof::is_data_error(e.kind()) ? kData : kCompute;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCompute;
  }
  return kUsage;
}
