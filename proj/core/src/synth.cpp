#include "tsrkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "tsrkit/error.hpp"
#include "tsrkit/targets.hpp"

namespace tsrkit {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : state_(splitmix64(seed)) {
  if (state_ == 0) state_ = 0x9E3779B97F4A7C15ull;  // xorshift must not start at 0
}

std::uint64_t Rng::next() {
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  return state_ * 0x2545F4914F6CDD1Dull;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

int Rng::uniform_int(int lo, int hi) {
  if (hi < lo) throw_invalid("Rng::uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t v;
  do {
    v = next();
  } while (v >= limit);
  return static_cast<int>(lo + static_cast<std::int64_t>(v % span));
}

Rng Rng::split() { return Rng(next()); }

const char* to_string(WarpKind kind) {
  switch (kind) {
    case WarpKind::None: return "none";
    case WarpKind::Affine: return "affine";
    case WarpKind::Homography: return "homography";
  }
  return "?";
}

WarpKind parse_warp_kind(const std::string& s) {
  if (s == "none") return WarpKind::None;
  if (s == "affine") return WarpKind::Affine;
  if (s == "homography") return WarpKind::Homography;
  throw_invalid("unknown warp kind '" + s + "' (expected none, affine or homography)");
}

void check_synth_config(const SynthConfig& cfg) {
  if (cfg.rows.lo < 1 || cfg.rows.hi < cfg.rows.lo) throw_invalid("synth: row range must be non-empty and >= 1");
  if (cfg.cols.lo < 1 || cfg.cols.hi < cfg.cols.lo) throw_invalid("synth: column range must be non-empty and >= 1");
  if (!(cfg.merge_probability >= 0.0 && cfg.merge_probability <= 1.0))
    throw_invalid("synth: merge_probability must be in [0,1]");
  if (cfg.max_merge_span < 1) throw_invalid("synth: max_merge_span must be >= 1");
  if (!(cfg.warp_magnitude >= 0.0 && cfg.warp_magnitude < 0.25)) throw_invalid("synth: warp_magnitude must be in [0,0.25)");
  if (cfg.height < 1 || cfg.width < 1) throw_invalid("synth: image size must be positive");
  if (cfg.lattice < 0) throw_invalid("synth: lattice must be >= 0");
  if (!(cfg.size_jitter >= 0.0)) throw_invalid("synth: size_jitter must be >= 0");
  if (!(cfg.min_cell_size > 0.0)) throw_invalid("synth: min_cell_size must be positive");
}

Homography homography_from_points(const std::array<Point2, 4>& src, const std::array<Point2, 4>& dst) {
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int k = 0; k < 4; ++k) {
    const double x = src[k].x, y = src[k].y, u = dst[k].x, v = dst[k].y;
    a.row(2 * k) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    a.row(2 * k + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * k) = u;
    b(2 * k + 1) = v;
  }
  Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (!lu.isInvertible()) throw_invalid("homography_from_points: degenerate correspondences");
  const Eigen::Matrix<double, 8, 1> h = lu.solve(b);
  return {h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0};
}

Point2 apply_homography(const Homography& h, Point2 p) {
  const double w = h[6] * p.x + h[7] * p.y + h[8];
  const double x = h[0] * p.x + h[1] * p.y + h[2];
  const double y = h[3] * p.x + h[4] * p.y + h[5];
  if (w == 1.0) return {x, y};  // keeps affine maps exact
  return {x / w, y / w};
}

TableAnnotation warp_annotation(const TableAnnotation& ann, const Homography& h) {
  Eigen::Matrix3d m;
  m << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];
  if (!(std::abs(m.determinant()) > 1e-12)) throw_invalid("warp_annotation: transform is not invertible");
  TableAnnotation out = ann;
  for (std::size_t i = 0; i < out.cells.size(); ++i) {
    Quad q;
    for (int k = 0; k < 4; ++k) {
      const Point2 p = ann.cells[i].quad[k];
      if (!(h[6] * p.x + h[7] * p.y + h[8] > 0.0))
        throw_invalid("warp_annotation: cell " + std::to_string(i) + " crosses the horizon line");
      q[k] = apply_homography(h, p);
      if (!(q[k].x >= 0.0 && q[k].y >= 0.0 && q[k].x <= ann.image_width && q[k].y <= ann.image_height))
        throw_invalid("warp_annotation: cell " + std::to_string(i) + " corner " + std::to_string(k + 1) +
                      " leaves the image");
    }
    if (signed_area(q) <= 0.0) throw_invalid("warp_annotation: cell " + std::to_string(i) + " is folded");
    out.cells[i].quad = normalize_quad(q);
  }
  return out;
}

namespace {

// Boundaries start, ..., start + length split by random weights.
std::vector<double> draw_boundaries(Rng& rng, int count, double start, double length, const SynthConfig& cfg,
                                    const char* what) {
  std::vector<double> weights(count);
  double total = 0.0;
  for (auto& w : weights) {
    w = rng.uniform(1.0, 1.0 + cfg.size_jitter);
    total += w;
  }
  std::vector<double> lines(count + 1);
  double acc = 0.0;
  for (int i = 0; i <= count; ++i) {
    lines[i] = start + length * (acc / total);
    if (i < count) acc += weights[i];
  }
  lines[count] = start + length;

  auto min_gap = [](const std::vector<double>& v) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < v.size(); ++i) g = std::min(g, v[i] - v[i - 1]);
    return g;
  };
  if (cfg.lattice > 0) {
    std::vector<double> snapped = lines;
    for (auto& v : snapped) v = cfg.lattice * std::round(v / cfg.lattice);
    if (min_gap(snapped) >= cfg.min_cell_size) return snapped;
  }
  if (min_gap(lines) < cfg.min_cell_size)
    throw_invalid(std::string("synth: infeasible geometry, ") + std::to_string(count) + " " + what +
                  " cannot each be at least " + std::to_string(cfg.min_cell_size) + " px");
  return lines;
}

}  // namespace

TableAnnotation gen_table(const SynthConfig& cfg) {
  check_synth_config(cfg);
  Rng rng(cfg.seed);
  const int rows = rng.uniform_int(cfg.rows.lo, cfg.rows.hi);
  const int cols = rng.uniform_int(cfg.cols.lo, cfg.cols.hi);

  const double diag = std::hypot(cfg.width, cfg.height);
  const double displacement = cfg.warp == WarpKind::None ? 0.0 : cfg.warp_magnitude * diag;
  const double mx = displacement + 0.05 * cfg.width;
  const double my = displacement + 0.05 * cfg.height;
  const double avail_w = cfg.width - 2.0 * mx;
  const double avail_h = cfg.height - 2.0 * my;
  if (avail_w < cols * cfg.min_cell_size)
    throw_invalid("synth: infeasible geometry, " + std::to_string(cols) + " columns do not fit the image width");
  if (avail_h < rows * cfg.min_cell_size)
    throw_invalid("synth: infeasible geometry, " + std::to_string(rows) + " rows do not fit the image height");

  const double tw = std::max(avail_w * rng.uniform(0.75, 1.0), cols * cfg.min_cell_size);
  const double th = std::max(avail_h * rng.uniform(0.75, 1.0), rows * cfg.min_cell_size);
  const double left = mx + rng.uniform(0.0, avail_w - tw);
  const double top = my + rng.uniform(0.0, avail_h - th);

  SynthConfig grid_cfg = cfg;
  if (cfg.warp != WarpKind::None) grid_cfg.lattice = 0;
  const std::vector<double> xs = draw_boundaries(rng, cols, left, tw, grid_cfg, "columns");
  const std::vector<double> ys = draw_boundaries(rng, rows, top, th, grid_cfg, "rows");

  // Merges: scan row-major, grow a random rectangle clipped to free space.
  std::vector<char> used(static_cast<std::size_t>(rows) * cols, 0);
  auto taken = [&](int r, int c) -> char& { return used[static_cast<std::size_t>(r) * cols + c]; };
  TableAnnotation ann;
  ann.image_width = cfg.width;
  ann.image_height = cfg.height;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (taken(r, c)) continue;
      int rspan = 1;
      int cspan = 1;
      if (cfg.merge_probability > 0.0 && rng.bernoulli(cfg.merge_probability)) {
        rspan = rng.uniform_int(1, cfg.max_merge_span);
        cspan = rng.uniform_int(1, cfg.max_merge_span);
        cspan = std::min(cspan, cols - c);
        for (int k = 1; k < cspan; ++k)
          if (taken(r, c + k)) {
            cspan = k;
            break;
          }
        rspan = std::min(rspan, rows - r);
        for (int k = 1; k < rspan; ++k) {
          bool free_row = true;
          for (int j = 0; j < cspan; ++j) free_row = free_row && !taken(r + k, c + j);
          if (!free_row) {
            rspan = k;
            break;
          }
        }
      }
      for (int i = 0; i < rspan; ++i)
        for (int j = 0; j < cspan; ++j) taken(r + i, c + j) = 1;
      Quad q;
      q[0] = {xs[c], ys[r]};
      q[1] = {xs[c + cspan], ys[r]};
      q[2] = {xs[c + cspan], ys[r + rspan]};
      q[3] = {xs[c], ys[r + rspan]};
      ann.cells.push_back({q, {r, r + rspan - 1, c, c + cspan - 1}});
    }
  }

  if (cfg.warp != WarpKind::None) {
    const std::array<Point2, 4> src = {Point2{left, top}, Point2{left + tw, top}, Point2{left + tw, top + th},
                                       Point2{left, top + th}};
    std::array<Point2, 4> dst{};
    // The affine fourth corner moves by j0 + j2 - j1, so each jitter gets a
    // third of the budget there.
    const double budget = cfg.warp == WarpKind::Affine ? displacement / 3.0 : displacement;
    auto jitter = [&] {
      const double radius = budget * std::sqrt(rng.uniform());
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      return Point2{radius * std::cos(angle), radius * std::sin(angle)};
    };
    for (int k = 0; k < 3; ++k) dst[k] = src[k] + jitter();
    if (cfg.warp == WarpKind::Affine) {
      dst[3] = dst[0] + (dst[2] - dst[1]);
    } else {
      dst[3] = src[3] + jitter();
    }
    Homography h = homography_from_points(src, dst);
    if (cfg.warp == WarpKind::Affine) h[6] = h[7] = 0.0, h[8] = 1.0;
    ann = warp_annotation(ann, h);
  }

  const auto report = validate_annotation(ann);
  if (!report.empty()) throw_internal("synth: generated table is invalid:\n" + format_report(report));
  return ann;
}

SynthConfig harness_config(std::uint64_t seed, int height, int width) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.height = height;
  cfg.width = width;
  cfg.warp = seed % 4 == 0 ? WarpKind::Homography : seed % 4 == 1 ? WarpKind::Affine : WarpKind::None;
  return cfg;
}

RawNetworkOutput render_oracle(const TableAnnotation& ann, const LossConfig& cfg) {
  return targets_as_output(assemble_target_bundle(ann, cfg));
}

}  // namespace tsrkit
