#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "png_image.hpp"
#include "tsrkit/annotation_io.hpp"
#include "tsrkit/error.hpp"
#include "tsrkit/gridify.hpp"
#include "tsrkit/losses.hpp"
#include "tsrkit/metrics.hpp"
#include "tsrkit/targets.hpp"
#include "tsrkit/teds.hpp"
#include "tsrkit/tensor_io.hpp"
#include "worker_pool.hpp"

namespace tsrkit::cli {

using ojson = nlohmann::ordered_json;

namespace {

std::vector<fs::path> json_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::string tcn_bytes(const RasterMap& map) {
  std::ostringstream os(std::ios::binary);
  write_tcn(os, map);
  return os.str();
}

/// Files to write, computed fully before anything touches the disk.
using FileSet = std::vector<std::pair<fs::path, std::string>>;

void write_all(const FileSet& files) {
  for (const auto& [path, bytes] : files) write_file_atomic(path, bytes);
}

TableAnnotation load_valid_annotation(const fs::path& path) {
  const TableAnnotation ann = load_annotation(path);
  const auto report = validate_annotation(ann);
  if (!report.empty()) throw_invalid(path.string() + ": invalid annotation\n" + format_report(report));
  return ann;
}

}  // namespace

IntRange parse_range(const std::string& text, const char* what) {
  IntRange r;
  try {
    const auto dots = text.find("..");
    std::size_t used = 0;
    if (dots == std::string::npos) {
      r.lo = r.hi = std::stoi(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } else {
      const std::string a = text.substr(0, dots), b = text.substr(dots + 2);
      r.lo = std::stoi(a, &used);
      if (used != a.size()) throw std::invalid_argument(text);
      r.hi = std::stoi(b, &used);
      if (used != b.size()) throw std::invalid_argument(text);
    }
  } catch (const std::exception&) {
    throw_invalid(std::string(what) + ": expected N or A..B, got '" + text + "'");
  }
  if (r.hi < r.lo) throw_invalid(std::string(what) + ": empty range '" + text + "'");
  return r;
}

// ---------------------------------------------------------------- gen-targets

int run_gen_targets(const GenTargetsOptions& opt, const GlobalOptions& global) {
  check_loss_config(opt.loss);
  if (!fs::exists(opt.input)) throw_invalid("input not found: " + opt.input.string());
  const bool batch = fs::is_directory(opt.input);
  const std::vector<fs::path> inputs = batch ? json_files(opt.input) : std::vector<fs::path>{opt.input};
  if (inputs.empty()) throw_invalid("no .json annotations in " + opt.input.string());

  // Validate everything first: a bad input leaves no output behind.
  std::vector<TableAnnotation> anns(inputs.size());
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    try {
      anns[i] = load_valid_annotation(inputs[i]);
      if (opt.gridify) anns[i] = cells_to_grids(anns[i]);
    } catch (const TsrError& e) {
      if (e.kind() != ErrorKind::InvalidInput) throw;
      problems.push_back(e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += p + "\n";
    throw_invalid(msg.substr(0, msg.size() - 1));
  }

  std::vector<FileSet> outputs(inputs.size());
  parallel_for(inputs.size(), global.threads, [&](std::size_t i) {
    const fs::path dir = batch ? opt.output / inputs[i].stem() : opt.output;
    const TargetBundle bundle = assemble_target_bundle(anns[i], opt.loss);
    const RawNetworkOutput raw = targets_as_output(bundle);
    FileSet& f = outputs[i];
    f.emplace_back(dir / "heatmap.tcn", tcn_bytes(bundle.heatmap));
    f.emplace_back(dir / "rowmap.tcn", tcn_bytes(bundle.row_map));
    f.emplace_back(dir / "colmap.tcn", tcn_bytes(bundle.col_map));
    f.emplace_back(dir / "mask.tcn", tcn_bytes(bundle.mask));
    f.emplace_back(dir / "sparse.json", sparse_targets_to_json(bundle));
    f.emplace_back(dir / "offsets.tcn", tcn_bytes(raw.offsets));
    f.emplace_back(dir / "center2corners.tcn", tcn_bytes(raw.center2corners));
    f.emplace_back(dir / "corners2center.tcn", tcn_bytes(raw.corners2center));
    f.emplace_back(dir / "spans.tcn", tcn_bytes(raw.spans));
    f.emplace_back(dir / "meta.json", ojson{{"H", raw.meta.height}, {"W", raw.meta.width},
                                            {"downscale", raw.meta.downscale}}.dump(1) + "\n");
    for (const auto& w : bundle.warnings) std::cerr << inputs[i].string() << ": warning: " << w << "\n";
  });
  for (const auto& f : outputs) write_all(f);
  if (global.verbose) std::cerr << "gen-targets: wrote " << inputs.size() << " target set(s)\n";
  return 0;
}

// --------------------------------------------------------------------- decode

int run_decode(const DecodeOptions& opt, const GlobalOptions& global) {
  if (!fs::is_directory(opt.input)) throw_invalid("not a tensor directory: " + opt.input.string());
  const bool batch = !fs::exists(opt.input / "meta.json");
  std::vector<fs::path> dirs;
  if (batch) {
    for (const auto& e : fs::directory_iterator(opt.input))
      if (e.is_directory() && fs::exists(e.path() / "meta.json")) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) throw_invalid("missing file: " + (opt.input / "meta.json").string());
  } else {
    dirs.push_back(opt.input);
  }

  std::vector<RawNetworkOutput> raws(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) raws[i] = load_raw_output(dirs[i]);

  std::vector<FileSet> outputs(dirs.size());
  parallel_for(dirs.size(), global.threads, [&](std::size_t i) {
    const DecodedTable table = decode_table(raws[i], opt.config);
    fs::path out_json, diag;
    if (batch) {
      out_json = opt.output / (dirs[i].filename().string() + ".json");
      diag = opt.output / "diagnostics" / (dirs[i].filename().string() + ".json");
    } else {
      out_json = opt.output;
      diag = !opt.diagnostics.empty() ? opt.diagnostics
                                      : opt.output.parent_path() / "diagnostics" / opt.output.filename();
    }
    outputs[i].emplace_back(out_json, annotation_to_json(table.annotation));
    outputs[i].emplace_back(diag, diagnostics_to_json(table));
  });
  for (const auto& f : outputs) write_all(f);
  if (global.verbose) std::cerr << "decode: decoded " << dirs.size() << " table(s)\n";
  return 0;
}

// ----------------------------------------------------------------------- eval

namespace {

struct DocEval {
  MatchCounts physical;
  MatchCounts adjacency;
  LogicalAccuracy logical;
  double teds = 0.0;
  std::string teds_error;
};

ojson prf_json(const MatchCounts& c) {
  const PRF p = prf_from_counts(c);
  return ojson{{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1},
               {"true_positive", c.true_positive}, {"predicted", c.predicted}, {"ground_truth", c.ground_truth}};
}

ojson logical_json(const LogicalAccuracy& a) {
  return ojson{{"acc", a.acc},         {"acc_row_start", a.row_start}, {"acc_row_end", a.row_end},
               {"acc_col_start", a.col_start}, {"acc_col_end", a.col_end}};
}

DocEval evaluate_pair(const TableAnnotation& gt, const TableAnnotation& pred, double iou) {
  DocEval d;
  const CellMatching m = match_cells(gt, pred, iou);
  d.physical = {static_cast<long long>(m.pairs.size()), static_cast<long long>(pred.cells.size()),
                static_cast<long long>(gt.cells.size())};
  d.adjacency = adjacency_counts(gt, pred, m);
  d.logical = logical_accuracy(gt, pred, m);
  try {
    d.teds = teds(to_structure_tree(gt), to_structure_tree(pred));
  } catch (const TsrError& e) {
    d.teds = 0.0;
    d.teds_error = e.what();
  }
  return d;
}

}  // namespace

int run_eval(const EvalOptions& opt, const GlobalOptions& global) {
  if (!(opt.iou > 0.0 && opt.iou <= 1.0)) throw_invalid("--iou must be in (0,1]");
  if (!(opt.beta > 0.0)) throw_invalid("--beta must be positive");
  if (!fs::exists(opt.gt)) throw_invalid("gt not found: " + opt.gt.string());
  if (!fs::exists(opt.pred)) throw_invalid("pred not found: " + opt.pred.string());

  std::vector<std::string> names;
  std::vector<fs::path> gt_paths, pred_paths;
  if (fs::is_directory(opt.gt) != fs::is_directory(opt.pred))
    throw_invalid("--gt and --pred must both be files or both be directories");
  if (fs::is_directory(opt.gt)) {
    std::map<std::string, fs::path> g, p;
    for (const auto& f : json_files(opt.gt)) g[f.filename().string()] = f;
    for (const auto& f : json_files(opt.pred)) p[f.filename().string()] = f;
    std::string diff;
    for (const auto& [n, _] : g)
      if (!p.count(n)) diff += "\n  only in gt: " + n;
    for (const auto& [n, _] : p)
      if (!g.count(n)) diff += "\n  only in pred: " + n;
    if (!diff.empty()) throw_invalid("filename mismatch between gt and pred:" + diff);
    if (g.empty()) throw_invalid("no .json files in " + opt.gt.string());
    for (const auto& [n, path] : g) {
      names.push_back(n);
      gt_paths.push_back(path);
      pred_paths.push_back(p[n]);
    }
  } else {
    names.push_back(opt.gt.filename().string());
    gt_paths.push_back(opt.gt);
    pred_paths.push_back(opt.pred);
  }

  std::vector<TableAnnotation> gts(names.size()), preds(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    gts[i] = load_valid_annotation(gt_paths[i]);
    preds[i] = load_annotation(pred_paths[i]);  // predictions may overlap; only the schema is enforced
  }

  std::vector<DocEval> docs(names.size());
  parallel_for(names.size(), global.threads, [&](std::size_t i) { docs[i] = evaluate_pair(gts[i], preds[i], opt.iou); });

  // Fold in filename order.
  MatchCounts phys, adj;
  LogicalAccuracy mean_acc{0, 0, 0, 0, 0, false};
  double mean_teds = 0.0;
  ojson per_doc = ojson::array();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const DocEval& d = docs[i];
    phys += d.physical;
    adj += d.adjacency;
    mean_acc.acc += d.logical.acc;
    mean_acc.row_start += d.logical.row_start;
    mean_acc.row_end += d.logical.row_end;
    mean_acc.col_start += d.logical.col_start;
    mean_acc.col_end += d.logical.col_end;
    mean_teds += d.teds;
    ojson entry{{"name", names[i]},
                {"physical", prf_json(d.physical)},
                {"adjacency", prf_json(d.adjacency)},
                {"logical", logical_json(d.logical)},
                {"teds", d.teds},
                {"f_beta", f_beta(prf_from_counts(d.physical).f1, d.logical.acc, opt.beta)}};
    if (d.logical.empty_table) entry["empty_table"] = true;
    if (!d.teds_error.empty()) entry["teds_error"] = d.teds_error;
    per_doc.push_back(std::move(entry));
  }
  const double n = static_cast<double>(names.size());
  mean_acc.acc /= n;
  mean_acc.row_start /= n;
  mean_acc.row_end /= n;
  mean_acc.col_start /= n;
  mean_acc.col_end /= n;
  mean_teds /= n;

  ojson report;
  report["aggregation"] = "micro-averaged counts for physical and adjacency P/R/F1; arithmetic mean over documents "
                          "for logical accuracies and TEDS; f_beta combines aggregate physical F1 with mean Acc";
  report["iou_threshold"] = opt.iou;
  report["beta"] = opt.beta;
  report["document_count"] = names.size();
  report["aggregate"] = ojson{{"physical", prf_json(phys)},
                              {"adjacency", prf_json(adj)},
                              {"logical", logical_json(mean_acc)},
                              {"teds", mean_teds},
                              {"f_beta", f_beta(prf_from_counts(phys).f1, mean_acc.acc, opt.beta)}};
  report["documents"] = std::move(per_doc);
  const std::string text = report.dump(2) + "\n";
  if (opt.output.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(opt.output, text);
  }
  return 0;
}

// -------------------------------------------------------------------- gridify

int run_gridify(const GridifyCommandOptions& opt, const GlobalOptions&) {
  const TableAnnotation ann = load_valid_annotation(opt.input);
  const TableAnnotation grid = cells_to_grids(ann);
  save_annotation(opt.output, grid);
  return 0;
}

// ---------------------------------------------------------------------- synth

namespace {

SynthConfig synth_config_from(const SynthOptions& opt, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.rows = parse_range(opt.rows, "--rows");
  cfg.cols = parse_range(opt.cols, "--cols");
  cfg.merge_probability = opt.merge_probability;
  cfg.max_merge_span = opt.max_merge_span;
  cfg.warp = parse_warp_kind(opt.warp);
  cfg.warp_magnitude = opt.warp_magnitude;
  cfg.height = opt.height;
  cfg.width = opt.width;
  cfg.seed = seed;
  check_synth_config(cfg);
  return cfg;
}

}  // namespace

int run_synth(const SynthOptions& opt, const GlobalOptions& global) {
  if (opt.count < 1) throw_invalid("--count must be >= 1");
  synth_config_from(opt, global.seed);  // reject bad flags before doing any work
  std::vector<FileSet> outputs(opt.count);
  parallel_for(static_cast<std::size_t>(opt.count), global.threads, [&](std::size_t i) {
    const std::uint64_t seed = global.seed + i;
    const TableAnnotation ann = gen_table(synth_config_from(opt, seed));
    const std::string name = "synth_" + std::to_string(seed);
    outputs[i].emplace_back(opt.output / "annotations" / (name + ".json"), annotation_to_json(ann));
    if (!opt.with_oracle) return;
    const RawNetworkOutput raw = render_oracle(ann);
    const fs::path dir = opt.output / "oracle" / name;
    outputs[i].emplace_back(dir / "heatmap.tcn", tcn_bytes(raw.heatmap));
    outputs[i].emplace_back(dir / "offsets.tcn", tcn_bytes(raw.offsets));
    outputs[i].emplace_back(dir / "center2corners.tcn", tcn_bytes(raw.center2corners));
    outputs[i].emplace_back(dir / "corners2center.tcn", tcn_bytes(raw.corners2center));
    outputs[i].emplace_back(dir / "spans.tcn", tcn_bytes(raw.spans));
    outputs[i].emplace_back(dir / "rowmap.tcn", tcn_bytes(raw.row_map));
    outputs[i].emplace_back(dir / "colmap.tcn", tcn_bytes(raw.col_map));
    outputs[i].emplace_back(dir / "meta.json", ojson{{"H", raw.meta.height}, {"W", raw.meta.width},
                                                     {"downscale", raw.meta.downscale}}.dump(1) + "\n");
  });
  for (const auto& f : outputs) write_all(f);
  return 0;
}

// ------------------------------------------------------------------ roundtrip

namespace {

struct RoundtripResult {
  WarpKind warp = WarpKind::None;
  std::size_t cells = 0;
  double logical_acc = 0.0;
  double f1 = 0.0;
  double max_corner_error = 0.0;
  bool passed = false;
};

RoundtripResult roundtrip_one(std::uint64_t seed, int height, int width) {
  const SynthConfig cfg = harness_config(seed, height, width);
  const TableAnnotation ann = gen_table(cfg);
  const DecodedTable dec = decode_table(render_oracle(ann));
  RoundtripResult r;
  r.warp = cfg.warp;
  r.cells = ann.cells.size();
  const CellMatching m = match_cells(ann, dec.annotation, 0.5);
  r.logical_acc = logical_accuracy(ann, dec.annotation, m).acc;
  r.f1 = prf_from_counts({static_cast<long long>(m.pairs.size()), static_cast<long long>(dec.annotation.cells.size()),
                          static_cast<long long>(ann.cells.size())}).f1;
  for (const auto& p : m.pairs)
    for (int k = 0; k < 4; ++k) {
      const Point2 d = ann.cells[p.gt].quad[k] - dec.annotation.cells[p.pred].quad[k];
      r.max_corner_error = std::max(r.max_corner_error, std::hypot(d.x, d.y));
    }
  r.passed = r.logical_acc == 1.0 && r.f1 == 1.0 && r.max_corner_error <= 2.0;
  return r;
}

}  // namespace

int run_roundtrip(const RoundtripOptions& opt, const GlobalOptions& global) {
  const IntRange seeds = parse_range(opt.seeds, "--seeds");
  if (seeds.lo < 0) throw_invalid("--seeds must be non-negative");
  const auto n = static_cast<std::size_t>(seeds.hi - seeds.lo + 1);
  std::vector<RoundtripResult> results(n);
  const auto t0 = std::chrono::steady_clock::now();
  parallel_for(n, global.threads, [&](std::size_t i) {
    results[i] = roundtrip_one(static_cast<std::uint64_t>(seeds.lo) + i, opt.height, opt.width);
  });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::size_t passed = 0, homography = 0, affine = 0;
  double min_acc = 1.0, min_f1 = 1.0, max_err = 0.0;
  ojson failures = ojson::array();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = results[i];
    passed += r.passed;
    homography += r.warp == WarpKind::Homography;
    affine += r.warp == WarpKind::Affine;
    min_acc = std::min(min_acc, r.logical_acc);
    min_f1 = std::min(min_f1, r.f1);
    max_err = std::max(max_err, r.max_corner_error);
    if (!r.passed) {
      failures.push_back({{"seed", seeds.lo + static_cast<int>(i)}, {"warp", to_string(r.warp)},
                          {"logical_acc", r.logical_acc}, {"f1", r.f1}, {"max_corner_error", r.max_corner_error}});
      std::cout << "FAIL seed " << seeds.lo + static_cast<int>(i) << " (" << to_string(r.warp) << "): acc "
                << r.logical_acc << ", F1 " << r.f1 << ", corner error " << r.max_corner_error << " px\n";
    }
  }
  std::ostringstream summary;
  summary.setf(std::ios::fixed);
  summary.precision(6);
  summary << "roundtrip: " << passed << "/" << n << " passed (" << homography << " homography, " << affine
          << " affine, " << n - homography - affine << " unwarped); min logical acc " << min_acc << ", min F1 "
          << min_f1 << ", max corner error " << max_err << " px";
  std::cout << summary.str() << "\n";
  if (global.verbose) std::cerr << "roundtrip: " << secs << " s\n";
  if (!opt.report.empty()) {
    ojson rep{{"seeds", opt.seeds}, {"passed", passed}, {"total", n}, {"homography", homography}, {"affine", affine},
              {"min_logical_acc", min_acc}, {"min_f1", min_f1}, {"max_corner_error", max_err},
              {"failures", std::move(failures)}};
    write_file_atomic(opt.report, rep.dump(2) + "\n");
  }
  return passed == n ? 0 : 3;
}

// ------------------------------------------------------------------ eval-loss

int run_eval_loss(const EvalLossOptions& opt, const GlobalOptions&) {
  check_loss_config(opt.loss);
  const RawNetworkOutput pred = load_raw_output(opt.pred);
  const TableAnnotation ann = load_valid_annotation(opt.target);
  const TargetBundle target = assemble_target_bundle(ann, opt.loss);
  if (!(pred.meta == target.meta))
    throw_invalid("prediction meta (" + std::to_string(pred.meta.height) + "x" + std::to_string(pred.meta.width) +
                  ", downscale " + std::to_string(pred.meta.downscale) + ") does not match the target");
  const OverallLoss loss = overall_loss(pred, target, opt.loss, false);
  for (const auto& w : loss.warnings) std::cerr << "warning: " << w << "\n";
  const std::string text = breakdown_to_json(loss.breakdown);
  if (opt.output.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(opt.output, text);
  }
  return 0;
}

// ------------------------------------------------------------------------ viz

namespace {

Image render_intensity(const RasterMap& map, int channel, int scale) {
  scale = std::max(scale, 1);
  Image img(map.width() * scale, map.height() * scale, kBackground);
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x) {
      const double v = std::clamp(map.at(y, x, channel), 0.0, 1.0);
      if (v <= 0.0) continue;
      const Rgb c = {static_cast<std::uint8_t>(std::lround(kBackground[0] + (255 - kBackground[0]) * v)),
                     static_cast<std::uint8_t>(std::lround(kBackground[1] * (1 - v))),
                     static_cast<std::uint8_t>(std::lround(kBackground[2] * (1 - v)))};
      for (int dy = 0; dy < scale; ++dy)
        for (int dx = 0; dx < scale; ++dx) img.set(x * scale + dx, y * scale + dy, c);
    }
  return img;
}

}  // namespace

int run_viz(const VizOptions& opt, const GlobalOptions&) {
  if (!fs::exists(opt.input)) throw_invalid("input not found: " + opt.input.string());
  std::optional<Image> img;
  if (fs::is_directory(opt.input)) {
    const fs::path dir = opt.input;
    auto need = [&](const char* name) {
      if (!fs::exists(dir / name)) throw_invalid("missing file: " + (dir / name).string());
      return load_tcn(dir / name);
    };
    std::optional<RasterMap> mask;
    if (fs::exists(dir / "mask.tcn")) mask = load_tcn(dir / "mask.tcn");
    if (opt.layer == "rowmap" || opt.layer == "colmap") {
      const RasterMap map = need(opt.layer == "rowmap" ? "rowmap.tcn" : "colmap.tcn");
      img = render_map(map, mask ? &*mask : nullptr, opt.scale);
    } else if (opt.layer == "mask") {
      if (!mask) throw_invalid("missing file: " + (dir / "mask.tcn").string());
      img = render_intensity(*mask, 0, opt.scale);
    } else if (opt.layer == "heatmap-center" || opt.layer == "heatmap-corner") {
      const RasterMap heat = need("heatmap.tcn");
      if (heat.channels() != 2) throw_invalid("heatmap.tcn must have 2 channels");
      img = render_intensity(heat, opt.layer == "heatmap-center" ? 0 : 1, opt.scale);
    } else {
      throw_invalid("unknown --layer '" + opt.layer + "' (rowmap, colmap, mask, heatmap-center, heatmap-corner)");
    }
  } else if (opt.input.extension() == ".tcn") {
    const RasterMap map = load_tcn(opt.input);
    if (map.channels() != 1) throw_invalid("viz: " + opt.input.string() + " must have a single channel");
    img = render_map(map, nullptr, opt.scale);
  } else if (opt.input.extension() == ".json") {
    img = render_annotation(load_annotation(opt.input), opt.max_side);
  } else {
    throw_invalid("unsupported viz input: " + opt.input.string());
  }
  write_file_atomic(opt.output, encode_png(*img));
  return 0;
}

}  // namespace tsrkit::cli
