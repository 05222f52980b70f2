#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sixdof::cli {

// Thrown for flag combinations CLI11 cannot reject on its own; exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Global {
  std::string manifest;
  std::string calibration;
  std::optional<std::uint64_t> seed;  // scenario files carry their own unless given
  unsigned threads = 0;
  std::string out = ".";

  // Flag overrides; precedence: defaults < manifest < calibration < flags.
  std::optional<double> overlap_threshold;
  std::optional<double> target_tpr;
  std::optional<std::size_t> relevant_min_size;
  std::optional<double> window;
  std::optional<double> persistence;
};

struct FrameRange {
  std::string spec;  // "A:B", "A:", ":B"; empty for all frames
};

int cmd_overlap(const Global& g, const FrameRange& frames);
int cmd_metrics(const Global& g, const std::vector<std::string>& metrics, const FrameRange& frames);
int cmd_calibrate(const Global& g, const std::vector<std::string>& metrics);

struct AblateArgs {
  std::vector<std::string> metrics;
  std::vector<double> grid;
  std::optional<double> fix_alpha;
  std::optional<double> fix_beta;
  std::optional<double> fix_gamma;
};
int cmd_ablate(const Global& g, const AblateArgs& args);

int cmd_cluster(const Global& g, const std::vector<std::string>& metrics, bool per_frame);
int cmd_evaluate(const Global& g, const std::vector<std::string>& metrics, bool per_frame);

struct SynthArgs {
  std::string scenario;
  std::string preset;
  std::string format = "binary";
};
int cmd_synth(const Global& g, const SynthArgs& args);

struct BenchArgs {
  std::size_t points = 100000;
  std::size_t pairs = 10;
  std::size_t frames = 5;
  std::size_t repeats = 3;
};
int cmd_bench(const Global& g, const BenchArgs& args);

}  // namespace sixdof::cli
