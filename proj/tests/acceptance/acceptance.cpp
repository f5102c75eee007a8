// Acceptance checks. Prints one PASS/FAIL line per criterion.
//
// Criteria listed with --expect-fail are known to fail for documented
// reasons; the exit status is 0 when exactly those fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "tsrkit/annotation_io.hpp"
#include "tsrkit/decoder.hpp"
#include "tsrkit/error.hpp"
#include "tsrkit/gridify.hpp"
#include "tsrkit/interpmap.hpp"
#include "tsrkit/losses.hpp"
#include "tsrkit/metrics.hpp"
#include "tsrkit/raster.hpp"
#include "tsrkit/synth.hpp"
#include "tsrkit/targets.hpp"
#include "tsrkit/teds.hpp"

using namespace tsrkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_corner_gap(const TableAnnotation& a, const TableAnnotation& b, bool* logical_equal) {
  if (a.cells.size() != b.cells.size()) {
    *logical_equal = false;
    return INFINITY;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    if (!(a.cells[i].logical == b.cells[i].logical)) *logical_equal = false;
    for (int k = 0; k < 4; ++k) {
      const Point2 d = a.cells[i].quad[k] - b.cells[i].quad[k];
      worst = std::max(worst, std::hypot(d.x, d.y));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------

Outcome criterion_fbeta() {
  const double a = f_beta(0.964, 0.829);
  const double b = f_beta(0.973, 0.830);
  return {std::abs(a - 0.934) <= 5e-4 && std::abs(b - 0.941) <= 5e-4,
          fmt("f_beta(0.964,0.829)=%.5f, f_beta(0.973,0.830)=%.5f", a, b)};
}

Outcome criterion_roundtrip() {
  const auto t0 = std::chrono::steady_clock::now();
  int passed = 0, homographies = 0;
  double min_acc = 1.0, min_f1 = 1.0, max_err = 0.0;
  std::vector<int> failures;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const SynthConfig cfg = harness_config(seed);
    homographies += cfg.warp == WarpKind::Homography;
    const TableAnnotation ann = gen_table(cfg);
    const DecodedTable dec = decode_table(render_oracle(ann));
    const CellMatching m = match_cells(ann, dec.annotation, 0.5);
    const double acc = logical_accuracy(ann, dec.annotation, m).acc;
    MatchCounts counts{static_cast<long long>(m.pairs.size()), static_cast<long long>(dec.annotation.cells.size()),
                       static_cast<long long>(ann.cells.size())};
    const double f1 = prf_from_counts(counts).f1;
    double err = 0.0;
    for (const auto& p : m.pairs)
      for (int k = 0; k < 4; ++k) {
        const Point2 d = dec.annotation.cells[p.pred].quad[k] - ann.cells[p.gt].quad[k];
        err = std::max(err, std::hypot(d.x, d.y));
      }
    min_acc = std::min(min_acc, acc);
    min_f1 = std::min(min_f1, f1);
    max_err = std::max(max_err, err);
    if (acc == 1.0 && f1 == 1.0 && err <= 2.0)
      ++passed;
    else
      failures.push_back(static_cast<int>(seed));
  }
  const double secs = elapsed_s(t0);
  std::string detail = fmt("%d/500 tables, %d homography-warped, min Acc %.6f, min F1 %.6f, max corner error %.3g px, %.1f s",
                           passed, homographies, min_acc, min_f1, max_err, secs);
  if (!failures.empty()) detail += fmt(", first failing seed %d", failures.front());
  return {passed == 500 && homographies >= 100 && secs < 120.0, detail};
}

Outcome criterion_interp_oracle() {
  int tables = 0, bad_pixels = 0, mask_mismatch = 0, max_cells = 0;
  for (std::uint64_t seed = 0; tables < 50; ++seed) {
    const TableAnnotation ann = gen_table(oracle::small_table_config(seed, 64, 3));
    max_cells = std::max(max_cells, static_cast<int>(ann.cells.size()));
    ++tables;
    const InterpMaps fast = generate_interp_maps(ann);
    const InterpResult rows = oracle::interpolate_bruteforce(build_row_polygons(ann), 64, 64);
    const InterpResult cols = oracle::interpolate_bruteforce(build_col_polygons(ann), 64, 64);
    for (std::size_t i = 0; i < rows.interp.data().size(); ++i) {
      bad_pixels += fast.rows.interp.data()[i] != rows.interp.data()[i];
      bad_pixels += fast.rows.mask.data()[i] != rows.mask.data()[i];
      bad_pixels += fast.cols.interp.data()[i] != cols.interp.data()[i];
      bad_pixels += fast.cols.mask.data()[i] != cols.mask.data()[i];
    }
    mask_mismatch += !(fast.rows.mask == fast.cols.mask);
  }
  return {bad_pixels == 0 && mask_mismatch == 0 && max_cells <= 10,
          fmt("%d tables at 64x64 (up to %d cells): %d differing pixels, %d row/col mask mismatches", tables,
              max_cells, bad_pixels, mask_mismatch)};
}

Outcome criterion_loss_at_gt() {
  int nonzero_spatial = 0, nonzero_boundary = 0, nonzero_span = 0, additivity = 0;
  int span_unwarped = 0, span_warped = 0;
  double worst_spatial = 0.0, worst_boundary = 0.0, worst_span = 0.0;
  std::vector<int> span_seeds;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SynthConfig cfg = harness_config(seed);
    const TableAnnotation ann = gen_table(cfg);
    const TargetBundle target = assemble_target_bundle(ann, LossConfig{});
    const RawNetworkOutput pred = targets_as_output(target);
    const LossBreakdown b = overall_loss(pred, target, LossConfig{}, false).breakdown;
    worst_spatial = std::max(worst_spatial, b.spatial);
    worst_boundary = std::max(worst_boundary, b.boundary);
    worst_span = std::max(worst_span, b.span);
    nonzero_spatial += b.spatial > 1e-9;
    nonzero_boundary += b.boundary > 1e-9;
    if (b.span > 1e-9) {
      ++nonzero_span;
      (cfg.warp == WarpKind::None ? span_unwarped : span_warped) += 1;
      if (span_seeds.size() < 6) span_seeds.push_back(static_cast<int>(seed));
    }
    const double sum = b.keypoint + b.offset + b.spatial + b.logical;
    additivity += std::abs(b.overall - sum) > 1e-12 || std::abs(b.logical - (b.boundary + b.span)) > 1e-12;
  }
  std::string seeds;
  for (int s : span_seeds) seeds += (seeds.empty() ? "" : ",") + std::to_string(s);
  return {nonzero_spatial == 0 && nonzero_boundary == 0 && nonzero_span == 0 && additivity == 0,
          fmt("100 tables: spatial>1e-9 on %d (max %.3g), boundary>1e-9 on %d (max %.3g), span>1e-9 on %d "
              "(%d unwarped, %d warped; max %.3g; seeds %s...), additivity violations %d",
              nonzero_spatial, worst_spatial, nonzero_boundary, worst_boundary, nonzero_span, span_unwarped,
              span_warped, worst_span, seeds.c_str(), additivity)};
}

Outcome criterion_gradients() {
  const LossConfig cfg;
  Rng rng(0x5eed);
  struct Tally {
    const char* name;
    double worst = 0.0;
    int failed = 0;
    long checked = 0;
    long skipped = 0;
  };
  Tally spatial{"spatial"}, boundary{"boundary"}, span{"span"}, keypoint{"keypoint"};
  auto record = [](Tally& t, const oracle::GradCheck& r) {
    t.worst = std::max(t.worst, r.relative_error);
    t.failed += !(r.relative_error < 1e-4) || r.checked == 0;
    t.checked += r.checked;
    t.skipped += r.skipped_near_kink;
  };
  using R = RawNetworkOutput;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const TableAnnotation ann = gen_table(oracle::small_table_config(seed, 64, 3));
    const TargetBundle target = assemble_target_bundle(ann, cfg);
    const RawNetworkOutput x = oracle::perturbed(targets_as_output(target), rng);
    {
      const SpatialWeights w = spatial_loss(x, target, cfg).weights;
      RawNetworkOutput g = make_zero_output(x.meta);
      spatial_loss(x, target, cfg, &g, &w);
      record(spatial, oracle::check_gradient(
                          [&](const R& p) { return spatial_loss(p, target, cfg, nullptr, &w).value; }, x, g,
                          oracle::active_coordinates(g, {&R::center2corners, &R::corners2center}, rng)));
    }
    {
      RawNetworkOutput g = make_zero_output(x.meta);
      boundary_loss(x.row_map, x.col_map, target.row_map, target.col_map, target.mask, &g.row_map, &g.col_map);
      record(boundary, oracle::check_gradient(
                           [&](const R& p) {
                             return boundary_loss(p.row_map, p.col_map, target.row_map, target.col_map, target.mask)
                                 .value;
                           },
                           x, g, oracle::active_coordinates(g, {&R::row_map, &R::col_map}, rng)));
    }
    {
      const SpanWeights w = span_loss(x, target, cfg).weights;
      RawNetworkOutput g = make_zero_output(x.meta);
      span_loss(x, target, cfg, &g, &w);
      record(span, oracle::check_gradient(
                       [&](const R& p) { return span_loss(p, target, cfg, nullptr, &w).value; }, x, g,
                       oracle::active_coordinates(g, {&R::spans, &R::row_map, &R::col_map}, rng)));
    }
    {
      RawNetworkOutput g = make_zero_output(x.meta);
      keypoint_loss(x, target, cfg, &g);
      record(keypoint, oracle::check_gradient(
                           [&](const R& p) { return keypoint_loss(p, target, cfg).value(); }, x, g,
                           oracle::active_coordinates(g, {&R::heatmap, &R::offsets}, rng)));
    }
  }
  std::string detail = "100 points each;";
  bool ok = true;
  for (const Tally* t : {&spatial, &boundary, &span, &keypoint}) {
    detail += fmt(" %s max rel err %.2e (%ld coords, %ld near kinks)", t->name, t->worst, t->checked, t->skipped);
    ok = ok && t->failed == 0;
  }
  return {ok, detail};
}

Outcome criterion_teds() {
  Rng rng(6);
  int mismatches = 0, identity_failures = 0, max_nodes = 0;
  for (int i = 0; i < 200; ++i) {
    const StructureTree a = oracle::random_tree(rng, 6);
    const StructureTree b = oracle::random_tree(rng, 6);
    max_nodes = std::max({max_nodes, a.size(), b.size()});
    const int d = tree_edit_distance(a, b);
    const int e = oracle::tree_edit_distance_exhaustive(a, b);
    const double expected = 1.0 - static_cast<double>(e) / std::max(a.size(), b.size());
    mismatches += d != e || teds(a, b) != expected;
    identity_failures += teds(a, a) != 1.0 || teds(b, b) != 1.0;
  }
  return {mismatches == 0 && identity_failures == 0,
          fmt("200 pairs (up to %d nodes): %d disagreements with exhaustive search, %d identity pairs below 1.0",
              max_nodes, mismatches, identity_failures)};
}

Outcome criterion_adjacency(const fs::path& fixtures) {
  int checked = 0, mismatches = 0;
  auto check = [&](const TableAnnotation& ann) {
    ++checked;
    mismatches += adjacency_relations(ann) != oracle::adjacency_pairs(ann);
  };
  for (std::uint64_t seed = 0; seed < 500; ++seed) check(gen_table(harness_config(seed)));
  for (const auto& e : fs::directory_iterator(fixtures))
    if (e.path().extension() == ".json") check(load_annotation(e.path()));
  const TableAnnotation merged = oracle::two_by_two_top_merged();
  check(merged);
  const auto rel = adjacency_relations(merged);
  return {mismatches == 0 && rel.size() == 3,
          fmt("%d tables: %d disagreements with pair enumeration; 2x2 merged fixture has %zu relations", checked,
              mismatches, rel.size())};
}

TableAnnotation rotate_about(const TableAnnotation& ann, double degrees, Point2 about) {
  const double t = degrees * std::numbers::pi / 180.0;
  TableAnnotation out = ann;
  for (auto& cell : out.cells) {
    for (auto& p : cell.quad.corners) {
      const Point2 d = p - about;
      p = {about.x + std::cos(t) * d.x - std::sin(t) * d.y, about.y + std::sin(t) * d.x + std::cos(t) * d.y};
    }
    cell.quad = normalize_quad(cell.quad);
  }
  return out;
}

TableAnnotation shifted(TableAnnotation ann, Point2 by, int w, int h) {
  for (auto& c : ann.cells)
    for (auto& p : c.quad.corners) p = p + by;
  ann.image_width = w;
  ann.image_height = h;
  return ann;
}

// Grid form of an axis-aligned table from its boundary coordinates; empty
// when some divider has no cell edge on it.
std::optional<TableAnnotation> axis_aligned_grid(const TableAnnotation& ann) {
  int rows = 0, cols = 0;
  for (const auto& c : ann.cells) {
    rows = std::max(rows, c.logical.row_end + 1);
    cols = std::max(cols, c.logical.col_end + 1);
  }
  std::vector<std::optional<double>> xs(cols + 1), ys(rows + 1);
  for (const auto& c : ann.cells) {
    xs[c.logical.col_start] = c.quad[0].x;
    xs[c.logical.col_end + 1] = c.quad[1].x;
    ys[c.logical.row_start] = c.quad[0].y;
    ys[c.logical.row_end + 1] = c.quad[3].y;
  }
  std::vector<double> x, y;
  for (const auto& v : xs) {
    if (!v) return std::nullopt;
    x.push_back(*v);
  }
  for (const auto& v : ys) {
    if (!v) return std::nullopt;
    y.push_back(*v);
  }
  return oracle::grid_from_lines(x, y, ann.image_width, ann.image_height);
}

Outcome criterion_gridify() {
  double identity_err = 0.0, rotation_err = 0.0, idempotence_err = 0.0;
  bool logical_ok = true;
  int rotated = 0, skipped = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SynthConfig plain;
    plain.seed = seed;
    plain.merge_probability = 0.0;
    const TableAnnotation grid = gen_table(plain);
    identity_err = std::max(identity_err, max_corner_gap(cells_to_grids(grid), grid, &logical_ok));

    SynthConfig small = plain;
    small.height = small.width = 512;
    for (double merge : {0.0, 0.3}) {
      small.merge_probability = merge;
      const TableAnnotation base = shifted(gen_table(small), {256, 256}, 1024, 1024);
      const auto oracle_grid = axis_aligned_grid(base);
      if (!oracle_grid) {
        ++skipped;
        continue;
      }
      const TableAnnotation turned = rotate_about(base, 10.0, {512, 512});
      const TableAnnotation expected = rotate_about(*oracle_grid, 10.0, {512, 512});
      rotation_err = std::max(rotation_err, max_corner_gap(cells_to_grids(turned), expected, &logical_ok));
      ++rotated;
    }
  }
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const TableAnnotation once = cells_to_grids(gen_table(harness_config(seed)));
    idempotence_err = std::max(idempotence_err, max_corner_gap(cells_to_grids(once), once, &logical_ok));
  }
  return {logical_ok && identity_err <= 1e-9 && rotation_err <= 1e-6 && idempotence_err <= 1e-9,
          fmt("identity max err %.3g on 50 tables; 10-degree rotation max err %.3g on %d tables (%d without full "
              "divider support skipped); idempotence max err %.3g on 100 tables",
              identity_err, rotation_err, rotated, skipped, idempotence_err)};
}

// ---------------------------------------------------------------------------

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

int run(const std::string& cmd, const fs::path& log) {
  const int status = std::system((cmd + " >>" + quote(log) + " 2>&1").c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

bool same_tree(const fs::path& a, const fs::path& b, std::string* why) {
  std::set<fs::path> names;
  for (const auto& root : {a, b})
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file()) names.insert(fs::relative(e.path(), root));
  for (const auto& n : names) {
    std::ifstream fa(a / n, std::ios::binary), fb(b / n, std::ios::binary);
    if (!fa || !fb) {
      *why = "only one side has " + n.string();
      return false;
    }
    const std::string sa((std::istreambuf_iterator<char>(fa)), {});
    const std::string sb((std::istreambuf_iterator<char>(fb)), {});
    if (sa != sb) {
      *why = n.string() + " differs";
      return false;
    }
  }
  if (names.empty()) {
    *why = "no files";
    return false;
  }
  return true;
}

Outcome criterion_cli(const fs::path& cli, const fs::path& fixtures, const fs::path& work) {
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path log = work / "cli.log";
  const std::string bin = quote(cli);
  int fixture_count = 0;
  for (const auto& e : fs::directory_iterator(fixtures)) fixture_count += e.path().extension() == ".json";

  std::vector<std::string> problems;
  bool metrics_ok = true;
  for (int threads : {1, 8}) {
    const fs::path dir = work / ("threads" + std::to_string(threads));
    const std::string g = bin + " --threads " + std::to_string(threads);
    if (run(g + " gen-targets " + quote(fixtures) + " " + quote(dir / "targets"), log) != 0 ||
        run(g + " decode " + quote(dir / "targets") + " " + quote(dir / "decoded"), log) != 0 ||
        run(g + " eval --gt " + quote(fixtures) + " --pred " + quote(dir / "decoded") + " --out " +
                quote(dir / "report.json"),
            log) != 0) {
      problems.push_back("pipeline failed with --threads " + std::to_string(threads));
      metrics_ok = false;
      continue;
    }
    const auto report = nlohmann::json::parse(std::ifstream(dir / "report.json"));
    const auto& agg = report.at("aggregate");
    std::vector<double> values = {agg["teds"], agg["f_beta"]};
    for (const char* group : {"physical", "adjacency"})
      for (const char* k : {"precision", "recall", "f1"}) values.push_back(agg[group][k]);
    for (const auto& [k, v] : agg["logical"].items()) values.push_back(v);
    if (report.at("document_count") != fixture_count ||
        !std::all_of(values.begin(), values.end(), [](double v) { return v == 1.0; })) {
      metrics_ok = false;
      problems.push_back("metrics below 1.0 with --threads " + std::to_string(threads));
    }
  }
  std::string why;
  const bool identical = same_tree(work / "threads1", work / "threads8", &why);
  if (!identical) problems.push_back("--threads 1 vs 8: " + why);

  // Exit-code table.
  const fs::path bad = work / "bad";
  fs::create_directories(bad / "invalid");
  std::ofstream(bad / "malformed.json") << "{\"image_width\": 10, \"cells\": [";
  std::ofstream(bad / "invalid" / "t.json")
      << R"({"image_width":20,"image_height":20,"cells":[{"quad":[0,0,30,0,30,10,0,10],"logical":[0,0,0,0]}]})";
  const fs::path tensors = work / "threads1" / "targets" / "synth_0";
  fs::copy(tensors, bad / "no_spans", fs::copy_options::recursive);
  fs::remove(bad / "no_spans" / "spans.tcn");
  fs::copy(tensors, bad / "bad_magic", fs::copy_options::recursive);
  {
    std::fstream f(bad / "bad_magic" / "heatmap.tcn", std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  fs::create_directories(bad / "pred_mismatch");
  fs::copy(work / "threads1" / "decoded" / "synth_0.json", bad / "pred_mismatch" / "other.json");
  std::ofstream(bad / "note.txt") << "not a table";

  struct ExitCase {
    const char* name;
    std::string cmd;
    int expected;
  };
  const std::vector<ExitCase> cases = {
      {"valid gen-targets", bin + " gen-targets " + quote(fixtures / "synth_0.json") + " " + quote(bad / "ok"), 0},
      {"malformed JSON", bin + " gen-targets " + quote(bad / "malformed.json") + " " + quote(bad / "m_out"), 2},
      {"invalid annotation", bin + " gen-targets " + quote(bad / "invalid") + " " + quote(bad / "i_out"), 2},
      {"missing raster", bin + " decode " + quote(bad / "no_spans") + " " + quote(bad / "d1.json"), 2},
      {"corrupt TCN magic", bin + " decode " + quote(bad / "bad_magic") + " " + quote(bad / "d2.json"), 2},
      {"unknown flag", bin + " decode --no-such-flag " + quote(tensors) + " " + quote(bad / "d3.json"), 2},
      {"eval filename mismatch",
       bin + " eval --gt " + quote(fixtures) + " --pred " + quote(bad / "pred_mismatch"), 2},
      {"unsupported viz input", bin + " viz " + quote(bad / "note.txt") + " " + quote(bad / "v.png"), 2},
      {"failed round trip", bin + " roundtrip --seeds 92..92 --height 192 --width 192", 3},
  };
  int exit_ok = 0;
  for (const auto& c : cases) {
    const int got = run(c.cmd, log);
    if (got == c.expected)
      ++exit_ok;
    else
      problems.push_back(fmt("%s: exit %d, expected %d", c.name, got, c.expected));
  }
  if (fs::exists(bad / "m_out") || fs::exists(bad / "i_out")) problems.push_back("partial output after an input error");

  std::string detail = fmt("%d fixtures through gen-targets|decode|eval: %s; exit codes %d/%zu; --threads 1 vs 8 %s",
                           fixture_count, metrics_ok ? "all metrics 1.0" : "metrics below 1.0", exit_ok,
                           cases.size(), identical ? "byte-identical" : "differ");
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty() && fixture_count == 20, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tsrkit acceptance checks"};
  std::string work = (fs::temp_directory_path() / "tsrkit_acceptance").string();
  std::string cli_path =
#ifdef TSRKIT_CLI_PATH
      TSRKIT_CLI_PATH;
#else
      "";
#endif
  std::string fixtures = TSRKIT_FIXTURE_DIR;
  std::vector<int> expect_fail;
  std::vector<int> only;
  app.add_option("--work-dir", work, "Scratch directory for the CLI criterion");
  app.add_option("--cli", cli_path, "Path of the tsrkit executable");
  app.add_option("--fixtures", fixtures, "Directory of fixture annotations");
  app.add_option("--expect-fail", expect_fail, "Criteria known to fail")->delimiter(',');
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"F_beta reproduction", criterion_fbeta},
      {"round-trip identity", criterion_roundtrip},
      {"interpolation oracle equivalence", criterion_interp_oracle},
      {"loss at ground truth", criterion_loss_at_gt},
      {"gradient correctness", criterion_gradients},
      {"TEDS oracle equivalence", criterion_teds},
      {"adjacency oracle equivalence", [&] { return criterion_adjacency(fixtures); }},
      {"gridify correctness", criterion_gridify},
      {"CLI contract",
       [&]() -> Outcome {
         if (cli_path.empty()) return {false, "no CLI executable configured"};
         return criterion_cli(cli_path, fixtures, work);
       }},
  };

  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool expected_failure = std::find(expect_fail.begin(), expect_fail.end(), id) != expect_fail.end();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first << "): " << o.detail;
    if (expected_failure) std::cout << (o.pass ? " [listed as expected failure but passed]" : " [expected failure]");
    std::cout << std::endl;
    if (o.pass == expected_failure) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
