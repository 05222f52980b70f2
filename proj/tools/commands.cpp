#include "commands.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "sixdof/bench.hpp"
#include "sixdof/csv.hpp"
#include "sixdof/error.hpp"
#include "sixdof/pipeline.hpp"
#include "sixdof/ply.hpp"

namespace sixdof::cli {
namespace fs = std::filesystem;

namespace {

Manifest manifest_for(const Global& g) {
  if (g.manifest.empty()) throw UsageError("--manifest is required for this command");
  Manifest m = load_manifest(g.manifest);
  if (!g.calibration.empty()) apply_calibration(m, load_calibration(g.calibration));
  if (g.overlap_threshold) m.overlap_threshold = *g.overlap_threshold;
  if (g.target_tpr) m.target_tpr = *g.target_tpr;
  if (g.relevant_min_size) m.relevant_min_size = *g.relevant_min_size;
  if (g.window) m.chunk.window = *g.window;
  if (g.persistence) m.chunk.persistence = *g.persistence;
  m.chunk.validate();
  return m;
}

fs::path out_dir(const Global& g) {
  fs::path dir(g.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", path.string()));
  return out;
}

RunOptions run_options(const Global& g, const FrameRange& frames) {
  RunOptions run;
  run.threads = g.threads;
  if (frames.spec.empty()) return run;
  const auto colon = frames.spec.find(':');
  if (colon == std::string::npos) throw UsageError("--frames expects A:B");
  const auto a = frames.spec.substr(0, colon);
  const auto b = frames.spec.substr(colon + 1);
  auto parse = [&](const std::string& s) {
    const auto v = csv::to_int(s);
    if (!v || *v < 0) throw UsageError(fmt::format("bad frame index '{}'", s));
    return static_cast<std::size_t>(*v);
  };
  if (!a.empty()) run.frame_begin = parse(a);
  if (!b.empty()) run.frame_end = parse(b);
  if (run.frame_end < run.frame_begin) throw UsageError("--frames end precedes start");
  return run;
}

std::vector<MetricId> metric_list(const std::vector<std::string>& names,
                                  std::vector<MetricId> fallback, bool allow_overlap) {
  if (names.empty()) return fallback;
  std::vector<MetricId> out;
  for (const auto& n : names) {
    const auto id = parse_metric(n);
    if (!id || (!allow_overlap && *id == MetricId::Overlap)) {
      throw UsageError(fmt::format("unknown metric '{}'", n));
    }
    out.push_back(*id);
  }
  return out;
}

std::vector<MetricId> proxies() { return {kProxyMetrics.begin(), kProxyMetrics.end()}; }

bool any_geodesic(const std::vector<MetricId>& ids) {
  return std::any_of(ids.begin(), ids.end(), needs_geodesic);
}

std::vector<SimilarityMatrix> overlap_of(const FeatureTable& t) {
  std::vector<SimilarityMatrix> out;
  for (std::size_t f = 0; f < t.frame_count(); ++f) out.push_back(t.overlap_matrix(f));
  return out;
}

std::string file_stem(const std::string& content_id) {
  std::string s = content_id;
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return s;
}

}  // namespace

int cmd_overlap(const Global& g, const FrameRange& frames) {
  const Manifest m = manifest_for(g);
  const fs::path dir = out_dir(g);
  const auto run = run_options(g, frames);
  for (const auto& entry : m.contents) {
    const FeatureTable t = content_features(m, load_dataset(m, entry), true, false, run);
    const auto matrices = overlap_of(t);
    auto out = open_out(dir / fmt::format("overlap_{}.csv", file_stem(entry.content_id)));
    write_matrices_csv(out, matrices, t.user_ids());
    std::cout << fmt::format("{}: {} frames, {} users\n", entry.content_id, t.frame_count(),
                             t.user_count());
  }
  return 0;
}

int cmd_metrics(const Global& g, const std::vector<std::string>& names, const FrameRange& frames) {
  const Manifest m = manifest_for(g);
  const auto ids = metric_list(names, proxies(), true);
  const bool overlap = std::find(ids.begin(), ids.end(), MetricId::Overlap) != ids.end();
  const fs::path dir = out_dir(g);
  const auto run = run_options(g, frames);
  for (const auto& entry : m.contents) {
    const FeatureTable t =
        content_features(m, load_dataset(m, entry), overlap, any_geodesic(ids), run);
    std::vector<SimilarityMatrix> matrices;
    for (std::size_t f = 0; f < t.frame_count(); ++f) {
      for (MetricId id : ids) matrices.push_back(t.matrix(f, m.config(id)));
    }
    auto out = open_out(dir / fmt::format("metrics_{}.csv", file_stem(entry.content_id)));
    write_matrices_csv(out, matrices, t.user_ids());
    std::cout << fmt::format("{}: {} frames x {} metrics\n", entry.content_id, t.frame_count(),
                             ids.size());
  }
  return 0;
}

int cmd_calibrate(const Global& g, const std::vector<std::string>& names) {
  const Manifest m = manifest_for(g);
  const auto ids = metric_list(names, proxies(), false);
  const auto tables = manifest_features(m, true, any_geodesic(ids), {g.threads});
  const CalibrationRun run = calibrate_metrics(m, tables, ids);
  const fs::path dir = out_dir(g);
  for (const auto& [id, roc] : run.roc) {
    auto out = open_out(dir / fmt::format("roc_{}.csv", to_string(id)));
    write_roc_csv(out, roc);
  }
  auto out = open_out(dir / "calibration.json");
  write_calibration_json(out, run.file);
  std::cout << fmt::format("target TPR {}\n", m.target_tpr);
  for (const auto& [id, c] : run.file.achieved) {
    std::cout << fmt::format("{:<4} S_th {:.4f}  tpr {:.3f}  fpr {:.3f}{}\n", to_string(id),
                             c.threshold, c.tpr, c.fpr, c.fpr < 0.4 ? "" : "  (fpr >= 0.4)");
  }
  return 0;
}

int cmd_ablate(const Global& g, const AblateArgs& args) {
  const Manifest m = manifest_for(g);
  const auto ids = metric_list(args.metrics, proxies(), false);
  const auto tables = manifest_features(m, true, any_geodesic(ids), {g.threads});
  const auto chosen = ablation_tables(m, tables);
  const std::vector<double> grid = args.grid.empty() ? kDefaultAblationGrid : args.grid;
  const PartialRegulators fixed{args.fix_alpha, args.fix_beta, args.fix_gamma};
  const fs::path dir = out_dir(g);

  nlohmann::ordered_json sets;
  auto regs = [](const AblationRecord& r) {
    return nlohmann::ordered_json::array({r.regulators.alpha, r.regulators.beta, r.regulators.gamma});
  };
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  for (MetricId id : ids) {
    AblationOptions options;
    options.threshold = m.config(id).threshold;
    options.evaluation = {m.overlap_threshold, m.relevant_min_size};
    options.threads = g.threads;
    const auto records = ablate(chosen, id, grid, options, fixed);
    auto out = open_out(dir / fmt::format("ablation_{}.csv", to_string(id)));
    write_ablation_csv(out, records);
    const auto best = select_parameter_sets(records);
    auto& item = sets[std::string(to_string(id))];
    const std::pair<const char*, const AblationRecord*> named[] = {
        {"set1", &best.set1}, {"set2", &best.set2}, {"set3", &best.set3}};
    for (const auto& [key, rec] : named) {
      item[key] = {{"regulators", regs(*rec)},
                   {"overlap_ratio", opt(rec->overlap_ratio)},
                   {"relevant_population", opt(rec->relevant_population)},
                   {"precision", opt(rec->precision)}};
    }
    std::cout << fmt::format("{}: {} records; set3 [{}, {}, {}]\n", to_string(id), records.size(),
                             best.set3.regulators.alpha, best.set3.regulators.beta,
                             best.set3.regulators.gamma);
  }
  auto out = open_out(dir / "parameter_sets.json");
  out << sets.dump(2) << '\n';
  return 0;
}

int cmd_cluster(const Global& g, const std::vector<std::string>& names, bool per_frame) {
  const Manifest m = manifest_for(g);
  const auto ids = metric_list(names, {MetricId::W7}, true);
  const bool overlap = std::find(ids.begin(), ids.end(), MetricId::Overlap) != ids.end();
  const std::optional<ChunkSpec> chunk = per_frame ? std::nullopt : std::optional(m.chunk);
  const fs::path dir = out_dir(g);
  for (const auto& entry : m.contents) {
    const FeatureTable t =
        content_features(m, load_dataset(m, entry), overlap, any_geodesic(ids), {g.threads});
    for (MetricId id : ids) {
      const MetricConfig cfg = m.config(id);
      const auto matrices = id == MetricId::Overlap ? overlap_of(t) : frame_matrices(t, cfg, g.threads);
      const auto results =
          cluster_matrices(matrices, t.fps(), cfg.threshold, chunk, m.relevant_min_size, g.threads);
      const auto stem = fmt::format("clusters_{}_{}", file_stem(entry.content_id), to_string(id));
      auto csv_out = open_out(dir / (stem + ".csv"));
      write_clusters_csv(csv_out, results, t.user_ids());
      auto json_out = open_out(dir / (stem + ".json"));
      write_clusters_json(json_out, results, t.user_ids());
      std::cout << fmt::format("{} {}: {} {}\n", entry.content_id, to_string(id), results.size(),
                               per_frame ? "frames" : "chunks");
    }
  }
  return 0;
}

int cmd_evaluate(const Global& g, const std::vector<std::string>& names, bool per_frame) {
  const Manifest m = manifest_for(g);
  auto fallback = proxies();
  fallback.push_back(MetricId::Overlap);
  const auto ids = metric_list(names, fallback, true);
  const auto tables = manifest_features(m, true, any_geodesic(ids), {g.threads});
  const std::optional<ChunkSpec> chunk = per_frame ? std::nullopt : std::optional(m.chunk);
  const fs::path dir = out_dir(g);
  std::vector<SummaryRow> rows;
  std::vector<SummaryRow> all_rows;
  for (MetricId id : ids) {
    const auto ev = evaluate_metric(m, tables, m.config(id), chunk, g.threads);
    for (const auto& ce : ev.contents) {
      rows.push_back(ce.row);
      auto out = open_out(dir / fmt::format("performance_{}_{}.csv", file_stem(ce.content_id),
                                            to_string(id)));
      write_performance_csv(out, ce.results, ce.performance);
    }
    all_rows.push_back(ev.all);
  }
  rows.insert(rows.end(), all_rows.begin(), all_rows.end());
  auto csv_out = open_out(dir / "summary.csv");
  write_summary_csv(csv_out, rows);
  auto txt_out = open_out(dir / "summary.txt");
  write_summary_table(txt_out, rows);
  write_summary_table(std::cout, rows);
  return 0;
}

int cmd_synth(const Global& g, const SynthArgs& args) {
  if (!args.scenario.empty() && !args.preset.empty()) {
    throw UsageError("give either --scenario or --preset");
  }
  SynthScenario s;
  if (!args.scenario.empty()) {
    std::ifstream in(args.scenario, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open '{}'", args.scenario));
    std::ostringstream text;
    text << in.rdbuf();
    s = parse_scenario(text.str());
  } else if (args.preset.empty() || args.preset == "planted-orbits") {
    s = planted_orbit_scenario();
  } else {
    throw UsageError(fmt::format("unknown preset '{}'", args.preset));
  }
  if (g.seed) s.seed = *g.seed;
  PlyFormat format;
  if (args.format == "binary") {
    format = PlyFormat::BinaryLittleEndian;
  } else if (args.format == "ascii") {
    format = PlyFormat::Ascii;
  } else {
    throw UsageError("--format must be ascii or binary");
  }

  const fs::path dir = out_dir(g);
  fs::create_directories(dir / "clouds");
  const std::size_t cloud_frames = is_static(s.cloud_kind) ? 1 : s.n_frames;
  for (std::size_t f = 0; f < cloud_frames; ++f) {
    write_ply_points(dir / "clouds" / fmt::format("frame_{:05}.ply", f),
                     generate_cloud_frame(s, f).points, format);
  }
  const auto trajectories = generate_trajectories(s);
  write_trajectories(dir / "trajectories.csv", trajectories);
  {
    auto out = open_out(dir / "labels.csv");
    out << "user_id,group\n";
    const auto labels = planted_labels(s);
    for (std::size_t u = 0; u < labels.size(); ++u) {
      out << synth_user_id(u) << ',' << labels[u] << '\n';
    }
  }
  {
    auto out = open_out(dir / "scenario.json");
    out << scenario_to_json(s);
  }
  Manifest m;
  m.contents.push_back({fmt::format("synth-{}-{}", to_string(s.cloud_kind), s.seed), "clouds",
                        "trajectories.csv", s.fps, true, is_static(s.cloud_kind)});
  m.frustum = s.frustum;
  auto out = open_out(dir / "manifest.json");
  write_manifest(out, m);
  std::cout << fmt::format("{} users, {} frames, {} cloud files\n", s.user_count(), s.n_frames,
                           cloud_frames);
  return 0;
}

int cmd_bench(const Global& g, const BenchArgs& args) {
  BenchOptions options;
  options.points = args.points;
  options.pairs = args.pairs;
  options.frames = args.frames;
  options.repeats = args.repeats;
  options.seed = g.seed.value_or(0);
  if (!g.manifest.empty()) {
    const Manifest m = manifest_for(g);
    options.frustum = m.frustum;
    options.graph_k = m.graph_k;
  }
  const BenchReport report = run_bench(options);
  const fs::path dir = out_dir(g);
  auto out = open_out(dir / "bench.csv");
  write_bench_csv(out, report);
  if (report.rows.empty()) {
    std::cout << "no pairs to time\n";
    return 0;
  }
  std::cout << fmt::format("{} points, {} pair-frames, graph build {:.3f} s\n", report.points,
                           report.pair_frames, report.graph_build_seconds);
  for (const auto& r : report.rows) {
    std::cout << fmt::format("{:<8} {:>12.3e} s/pair-frame  cv {:.3f}  speedup {}\n", r.name,
                             r.seconds, r.cv,
                             r.speedup ? fmt::format("{:.1f}x", *r.speedup) : "n/a");
  }
  return 0;
}

}  // namespace sixdof::cli
