#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "json_config.hpp"
#include "tsrkit/error.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace tsrkit::cli;

  CLI::App app{"tsrkit: table structure recognition targets, decoding and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "JSON file whose keys mirror long flag names; flags override it");
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.allow_config_extras(CLI::config_extras_mode::error);

  GlobalOptions global;
  app.add_option("--threads", global.threads, "Worker threads, 0 = one per core")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", global.seed, "Random seed (synth: first seed)");
  app.add_flag("--verbose", global.verbose, "Print the resolved configuration and progress to stderr");

  GenTargetsOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-targets", "Ground-truth targets from annotation JSON (file or directory)");
  gen_cmd->add_option("input", gen.input, "Annotation JSON or directory of them")->required();
  gen_cmd->add_option("output", gen.output, "Output directory")->required();
  gen_cmd->add_flag("--gridify", gen.gridify, "Split spanning cells into grid cells first");
  gen_cmd->add_option("--downscale", gen.loss.downscale, "Output stride")->capture_default_str()->check(CLI::PositiveNumber);

  DecodeOptions dec;
  auto* dec_cmd = app.add_subcommand("decode", "Decode network-output tensors into annotation JSON");
  dec_cmd->add_option("input", dec.input, "Tensor directory, or a directory of tensor directories")->required();
  dec_cmd->add_option("output", dec.output, "Output JSON (single) or directory (batch)")->required();
  dec_cmd->add_option("--diagnostics", dec.diagnostics, "Diagnostics JSON path (single input only)");
  dec_cmd->add_option_function<double>(
      "--tau", [&](double t) { dec.config.tau_center = dec.config.tau_corner = t; },
      "Peak threshold for both heatmap channels");
  dec_cmd->add_option("--tau-center", dec.config.tau_center, "Center peak threshold")->capture_default_str();
  dec_cmd->add_option("--tau-corner", dec.config.tau_corner, "Corner peak threshold")->capture_default_str();
  dec_cmd->add_option("--max-k", dec.config.max_k, "Maximum peaks per channel")->capture_default_str();
  dec_cmd->add_option("--align-radius", dec.config.align_radius, "Corner snap radius (lowres px)")->capture_default_str();
  dec_cmd->add_option("--back-epsilon", dec.config.back_epsilon, "Back-pointer tolerance (lowres px)")
      ->capture_default_str();
  dec_cmd->add_option("--sample-inset", dec.config.sample_inset, "Inset of the logical lookup point (lowres px)")
      ->capture_default_str();

  EvalOptions ev;
  auto* ev_cmd = app.add_subcommand("eval", "Evaluate predictions against ground truth");
  ev_cmd->add_option("--gt", ev.gt, "Ground-truth JSON file or directory")->required();
  ev_cmd->add_option("--pred", ev.pred, "Predicted JSON file or directory")->required();
  ev_cmd->add_option("--iou", ev.iou, "IoU threshold for cell matching")->capture_default_str();
  ev_cmd->add_option("--beta", ev.beta, "Beta of the combined F score")->capture_default_str();
  ev_cmd->add_option("--out", ev.output, "Report path (default: stdout)");

  GridifyCommandOptions grid;
  auto* grid_cmd = app.add_subcommand("gridify", "Convert a cell annotation into unit grid cells");
  grid_cmd->add_option("input", grid.input, "Annotation JSON")->required();
  grid_cmd->add_option("output", grid.output, "Output JSON")->required();

  SynthOptions syn;
  auto* syn_cmd = app.add_subcommand("synth", "Generate synthetic tables and their oracle tensors");
  syn_cmd->add_option("--out", syn.output, "Output directory")->required();
  syn_cmd->add_option("--count", syn.count, "Number of consecutive seeds")->capture_default_str();
  syn_cmd->add_option("--warp", syn.warp, "none, affine or homography")->capture_default_str();
  syn_cmd->add_option("--rows", syn.rows, "Row count range A..B")->capture_default_str();
  syn_cmd->add_option("--cols", syn.cols, "Column count range A..B")->capture_default_str();
  syn_cmd->add_option("--merge-probability", syn.merge_probability)->capture_default_str();
  syn_cmd->add_option("--max-merge-span", syn.max_merge_span)->capture_default_str();
  syn_cmd->add_option("--warp-magnitude", syn.warp_magnitude, "Fraction of the image diagonal")->capture_default_str();
  syn_cmd->add_option("--height", syn.height)->capture_default_str();
  syn_cmd->add_option("--width", syn.width)->capture_default_str();
  syn_cmd->add_flag("!--no-oracle", syn.with_oracle, "Skip the oracle tensors");

  RoundtripOptions rt;
  auto* rt_cmd = app.add_subcommand("roundtrip", "Decode oracle tensors of synthetic tables and compare");
  rt_cmd->add_option("--seeds", rt.seeds, "Seed range A..B")->capture_default_str();
  rt_cmd->add_option("--height", rt.height)->capture_default_str();
  rt_cmd->add_option("--width", rt.width)->capture_default_str();
  rt_cmd->add_option("--report", rt.report, "Write a JSON summary here");

  EvalLossOptions el;
  auto* el_cmd = app.add_subcommand("eval-loss", "Loss breakdown of predicted tensors against an annotation");
  el_cmd->add_option("--pred", el.pred, "Tensor directory")->required();
  el_cmd->add_option("--target", el.target, "Annotation JSON")->required();
  el_cmd->add_option("--out", el.output, "Output JSON (default: stdout)");
  el_cmd->add_option("--lambda-u", el.loss.lambda_u)->capture_default_str();
  el_cmd->add_option("--lambda-v", el.loss.lambda_v)->capture_default_str();
  el_cmd->add_option("--lambda-e", el.loss.lambda_e)->capture_default_str();
  el_cmd->add_option("--downscale", el.loss.downscale)->capture_default_str();

  VizOptions viz;
  auto* viz_cmd = app.add_subcommand("viz", "Render maps or annotations to PNG");
  viz_cmd->add_option("input", viz.input, "Tensor directory, .tcn raster or annotation JSON")->required();
  viz_cmd->add_option("output", viz.output, "Output PNG")->required();
  viz_cmd->add_option("--layer", viz.layer, "rowmap, colmap, mask, heatmap-center or heatmap-corner")
      ->capture_default_str();
  viz_cmd->add_option("--scale", viz.scale, "Pixel replication for maps")->capture_default_str();
  viz_cmd->add_option("--max-side", viz.max_side, "Longest side of annotation renders")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  if (global.verbose) std::cerr << "resolved config:\n" << app.config_to_str(true, false);

  try {
    if (*gen_cmd) return run_gen_targets(gen, global);
    if (*dec_cmd) return run_decode(dec, global);
    if (*ev_cmd) return run_eval(ev, global);
    if (*grid_cmd) return run_gridify(grid, global);
    if (*syn_cmd) return run_synth(syn, global);
    if (*rt_cmd) return run_roundtrip(rt, global);
    if (*el_cmd) return run_eval_loss(el, global);
    if (*viz_cmd) return run_viz(viz, global);
  } catch (const tsrkit::TsrError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == tsrkit::ErrorKind::InvalidInput ? kExitInput : kExitInternal;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
