#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tsrkit/decoder.hpp"
#include "tsrkit/loss_config.hpp"
#include "tsrkit/synth.hpp"

namespace tsrkit::cli {

namespace fs = std::filesystem;

struct GlobalOptions {
  int threads = 1;  // 0 = hardware concurrency
  std::uint64_t seed = 0;
  bool verbose = false;
};

struct GenTargetsOptions {
  fs::path input;
  fs::path output;
  bool gridify = false;
  LossConfig loss;
};

struct DecodeOptions {
  fs::path input;
  fs::path output;
  fs::path diagnostics;  // empty: <output dir>/diagnostics/<stem>.json
  DecodeConfig config;
};

struct EvalOptions {
  fs::path gt;
  fs::path pred;
  fs::path output;  // empty: stdout
  double iou = 0.5;
  double beta = 0.5;
};

struct GridifyCommandOptions {
  fs::path input;
  fs::path output;
};

struct SynthOptions {
  fs::path output;
  int count = 1;
  bool with_oracle = true;
  std::string warp = "none";
  std::string rows = "1..12";
  std::string cols = "1..10";
  double merge_probability = 0.2;
  int max_merge_span = 3;
  double warp_magnitude = 0.05;
  int height = 1024;
  int width = 1024;
};

struct RoundtripOptions {
  std::string seeds = "0..499";
  int height = 1024;
  int width = 1024;
  fs::path report;
};

struct EvalLossOptions {
  fs::path pred;
  fs::path target;
  fs::path output;
  LossConfig loss;
};

struct VizOptions {
  fs::path input;
  fs::path output;
  std::string layer = "rowmap";
  int scale = 4;
  int max_side = 1024;
};

int run_gen_targets(const GenTargetsOptions& opt, const GlobalOptions& global);
int run_decode(const DecodeOptions& opt, const GlobalOptions& global);
int run_eval(const EvalOptions& opt, const GlobalOptions& global);
int run_gridify(const GridifyCommandOptions& opt, const GlobalOptions& global);
int run_synth(const SynthOptions& opt, const GlobalOptions& global);
int run_roundtrip(const RoundtripOptions& opt, const GlobalOptions& global);
int run_eval_loss(const EvalLossOptions& opt, const GlobalOptions& global);
int run_viz(const VizOptions& opt, const GlobalOptions& global);

/// "a..b" or a single integer.
IntRange parse_range(const std::string& text, const char* what);

}  // namespace tsrkit::cli
