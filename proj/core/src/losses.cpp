#include "tsrkit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "tsrkit/error.hpp"

namespace tsrkit {

namespace {

double sign(double v) { return (v > 0.0) - (v < 0.0); }

void check_pair(const RawNetworkOutput& pred, const TargetBundle& target) {
  check_output_shape(pred);
  if (!(pred.meta == target.meta)) throw_invalid("loss: prediction and target metadata differ");
}

std::array<Point2, 4> read_slots(const RasterMap& c2c, PixelIndex px) {
  std::array<Point2, 4> out{};
  for (int s = 0; s < 4; ++s) out[s] = {c2c.at(px.y, px.x, 2 * s), c2c.at(px.y, px.x, 2 * s + 1)};
  return out;
}

}  // namespace

double pairing_weight(double u_norm, double residual_u, double residual_v, bool* degenerate) {
  if (degenerate) *degenerate = false;
  if (u_norm <= 0.0) {
    if (degenerate) *degenerate = true;
    return 1.0;
  }
  const double ratio = std::min((residual_u + residual_v) / u_norm, 1.0);
  return std::sin(std::numbers::pi / 2.0 * ratio);
}

double invalid_slot_loss(const std::vector<Point2>& invalid_vectors, int corner_count, int cell_count) {
  if (corner_count <= cell_count) return 0.0;
  double sum = 0.0;
  for (const auto& v : invalid_vectors) sum += std::abs(v.x) + std::abs(v.y);
  return sum / (8.0 * (corner_count - cell_count));
}

std::array<int, 4> match_corner_slots(const CornerTarget& gt, const std::array<Point2, 4>& pred) {
  const int k = gt.valid_count();
  std::array<int, 4> perm = {0, 1, 2, 3};
  std::array<int, 4> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (int j = 0; j < k; ++j) {
      cost += std::abs(pred[perm[j]].x - gt.slots[j].dx) + std::abs(pred[perm[j]].y - gt.slots[j].dy);
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

SpatialLoss spatial_loss(const RawNetworkOutput& pred, const TargetBundle& target, const LossConfig& cfg,
                         RawNetworkOutput* grad, const SpatialWeights* frozen) {
  check_pair(pred, target);
  SpatialLoss out;
  const int n = static_cast<int>(target.center2corners.size());
  const int m = static_cast<int>(target.corners2center.size());
  if (n == 0) return out;

  out.weights.slot_assignment.resize(m);
  for (int e = 0; e < m; ++e) {
    const CornerTarget& entry = target.corners2center[e];
    out.weights.slot_assignment[e] =
        frozen ? frozen->slot_assignment.at(e)
               : match_corner_slots(entry, read_slots(pred.corners2center, entry.pixel));
  }

  const double pair_norm = 8.0 * n;
  double pair_sum = 0.0;
  out.weights.omega.resize(n);
  for (int i = 0; i < n; ++i) {
    const CenterTarget& ct = target.center2corners[i];
    const CellLink& link = target.links.at(ct.cell);

    double u_norm = 0.0;
    double res_u = 0.0;
    for (int ch = 0; ch < 8; ++ch) {
      u_norm += std::abs(ct.u[ch]);
      res_u += std::abs(pred.center2corners.at(ct.pixel.y, ct.pixel.x, ch) - ct.u[ch]);
    }
    double res_v = 0.0;
    for (int k = 0; k < 4; ++k) {
      const int slot = link.corner_slot[k];
      if (slot < 0) continue;
      const CornerTarget& entry = target.corners2center[link.corner_entry[k]];
      const int p = out.weights.slot_assignment[link.corner_entry[k]][slot];
      res_v += std::abs(pred.corners2center.at(entry.pixel.y, entry.pixel.x, 2 * p) - entry.slots[slot].dx);
      res_v += std::abs(pred.corners2center.at(entry.pixel.y, entry.pixel.x, 2 * p + 1) - entry.slots[slot].dy);
    }

    double omega = 0.0;
    if (frozen) {
      omega = frozen->omega.at(i);
    } else {
      bool degenerate = false;
      omega = pairing_weight(u_norm, res_u, res_v, &degenerate);
      if (degenerate) out.warnings.push_back("cell " + std::to_string(ct.cell) + ": zero center-to-corner vector");
    }
    out.weights.omega[i] = omega;
    pair_sum += omega * (cfg.lambda_u * res_u + cfg.lambda_v * res_v);

    if (grad) {
      for (int ch = 0; ch < 8; ++ch) {
        const double r = pred.center2corners.at(ct.pixel.y, ct.pixel.x, ch) - ct.u[ch];
        grad->center2corners.at(ct.pixel.y, ct.pixel.x, ch) += omega * cfg.lambda_u * sign(r) / pair_norm;
      }
      for (int k = 0; k < 4; ++k) {
        const int slot = link.corner_slot[k];
        if (slot < 0) continue;
        const CornerTarget& entry = target.corners2center[link.corner_entry[k]];
        const int p = out.weights.slot_assignment[link.corner_entry[k]][slot];
        const double rx = pred.corners2center.at(entry.pixel.y, entry.pixel.x, 2 * p) - entry.slots[slot].dx;
        const double ry = pred.corners2center.at(entry.pixel.y, entry.pixel.x, 2 * p + 1) - entry.slots[slot].dy;
        grad->corners2center.at(entry.pixel.y, entry.pixel.x, 2 * p) += omega * cfg.lambda_v * sign(rx) / pair_norm;
        grad->corners2center.at(entry.pixel.y, entry.pixel.x, 2 * p + 1) += omega * cfg.lambda_v * sign(ry) / pair_norm;
      }
    }
  }
  out.pair_term = pair_sum / pair_norm;

  std::vector<Point2> invalid;
  std::vector<std::pair<int, int>> invalid_at;  // (entry, pred slot)
  for (int e = 0; e < m; ++e) {
    const CornerTarget& entry = target.corners2center[e];
    const auto slots = read_slots(pred.corners2center, entry.pixel);
    for (int j = entry.valid_count(); j < 4; ++j) {
      const int p = out.weights.slot_assignment[e][j];
      invalid.push_back(slots[p]);
      invalid_at.emplace_back(e, p);
    }
  }
  out.invalid_term = invalid_slot_loss(invalid, m, n);
  if (grad && m > n) {
    const double norm = 8.0 * (m - n);
    for (std::size_t j = 0; j < invalid.size(); ++j) {
      const PixelIndex px = target.corners2center[invalid_at[j].first].pixel;
      const int p = invalid_at[j].second;
      grad->corners2center.at(px.y, px.x, 2 * p) += cfg.lambda_e * sign(invalid[j].x) / norm;
      grad->corners2center.at(px.y, px.x, 2 * p + 1) += cfg.lambda_e * sign(invalid[j].y) / norm;
    }
  }
  out.value = out.pair_term + cfg.lambda_e * out.invalid_term;
  return out;
}

double boundary_weight(double value) {
  const double frac = 1.0 - std::abs(value - std::round(value));
  return frac * frac;
}

BoundaryLoss boundary_loss(const RasterMap& pred_row, const RasterMap& pred_col, const RasterMap& gt_row,
                           const RasterMap& gt_col, const RasterMap& mask, RasterMap* grad_row,
                           RasterMap* grad_col) {
  if (!pred_row.same_shape(gt_row) || !pred_col.same_shape(gt_col) || !gt_row.same_shape(mask) ||
      !gt_col.same_shape(mask))
    throw_invalid("boundary_loss: raster shapes differ");
  BoundaryLoss out;
  double mask_sum = 0.0;
  for (double v : mask.data()) mask_sum += v;
  if (mask_sum <= 0.0) {
    out.empty_mask = true;
    return out;
  }
  const double norm = 2.0 * mask_sum;
  const auto m = mask.data();
  const auto pr = pred_row.data();
  const auto pc = pred_col.data();
  const auto gr = gt_row.data();
  const auto gc = gt_col.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] != 1.0) continue;
    const double wr = boundary_weight(gr[i]);
    const double wc = boundary_weight(gc[i]);
    sum += wr * std::abs(gr[i] - pr[i]) + wc * std::abs(gc[i] - pc[i]);
    if (grad_row) grad_row->data()[i] += wr * sign(pr[i] - gr[i]) / norm;
    if (grad_col) grad_col->data()[i] += wc * sign(pc[i] - gc[i]) / norm;
  }
  out.value = sum / norm;
  return out;
}

PixelIndex nearest_pixel(Point2 p, int height, int width) {
  const int y = static_cast<int>(std::floor(p.y + 0.5));
  const int x = static_cast<int>(std::floor(p.x + 0.5));
  return {std::clamp(y, 0, height - 1), std::clamp(x, 0, width - 1)};
}

SpanEstimate span_from_maps(const std::array<Point2, 4>& corners, const RasterMap& row_map,
                            const RasterMap& col_map) {
  if (!row_map.same_shape(col_map) || row_map.empty()) throw_invalid("span_from_maps: bad map shapes");
  SpanEstimate est;
  for (int k = 0; k < 4; ++k) est.pixels[k] = nearest_pixel(corners[k], row_map.height(), row_map.width());
  auto r = [&](int k) { return row_map.at(est.pixels[k].y, est.pixels[k].x); };
  auto c = [&](int k) { return col_map.at(est.pixels[k].y, est.pixels[k].x); };
  est.row = {r(3) - r(0), r(2) - r(1)};
  est.col = {c(1) - c(0), c(2) - c(3)};
  return est;
}

double span_weight(double predicted, double target, const std::array<double, 2>& from_maps, double cap) {
  const double deviation =
      std::abs(predicted - target) + 0.5 * (std::abs(from_maps[0] - target) + std::abs(from_maps[1] - target));
  return std::sin(std::numbers::pi / (2.0 * cap) * std::min(deviation, cap));
}

SpanLoss span_loss(const RawNetworkOutput& pred, const TargetBundle& target, const LossConfig& cfg,
                   RawNetworkOutput* grad, const SpanWeights* frozen) {
  check_pair(pred, target);
  SpanLoss out;
  const int n = static_cast<int>(target.spans.size());
  if (n == 0) return out;
  out.weights.d_row.resize(n);
  out.weights.d_col.resize(n);

  double regress_sum = 0.0;
  double map_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const SpanTarget& st = target.spans[i];
    const CellLink& link = target.links.at(st.cell);
    const double sr_hat = pred.spans.at(st.pixel.y, st.pixel.x, 0);
    const double sc_hat = pred.spans.at(st.pixel.y, st.pixel.x, 1);
    const SpanEstimate est = span_from_maps(link.corners, pred.row_map, pred.col_map);

    const double d_r = frozen ? frozen->d_row.at(i) : span_weight(sr_hat, st.row_span, est.row, cfg.span_cap);
    const double d_c = frozen ? frozen->d_col.at(i) : span_weight(sc_hat, st.col_span, est.col, cfg.span_cap);
    out.weights.d_row[i] = d_r;
    out.weights.d_col[i] = d_c;

    regress_sum += d_r * std::abs(st.row_span - sr_hat) + d_c * std::abs(st.col_span - sc_hat);
    map_sum += d_r * 0.5 * (std::abs(st.row_span - est.row[0]) + std::abs(st.row_span - est.row[1])) +
               d_c * 0.5 * (std::abs(st.col_span - est.col[0]) + std::abs(st.col_span - est.col[1]));

    if (grad) {
      grad->spans.at(st.pixel.y, st.pixel.x, 0) += d_r * sign(sr_hat - st.row_span) / (2.0 * n);
      grad->spans.at(st.pixel.y, st.pixel.x, 1) += d_c * sign(sc_hat - st.col_span) / (2.0 * n);
      const auto& px = est.pixels;
      auto add = [](RasterMap& map, PixelIndex p, double g) { map.at(p.y, p.x) += g; };
      const double g_r0 = d_r * 0.5 * sign(est.row[0] - st.row_span) / (4.0 * n);
      const double g_r1 = d_r * 0.5 * sign(est.row[1] - st.row_span) / (4.0 * n);
      const double g_c0 = d_c * 0.5 * sign(est.col[0] - st.col_span) / (4.0 * n);
      const double g_c1 = d_c * 0.5 * sign(est.col[1] - st.col_span) / (4.0 * n);
      add(grad->row_map, px[3], g_r0);
      add(grad->row_map, px[0], -g_r0);
      add(grad->row_map, px[2], g_r1);
      add(grad->row_map, px[1], -g_r1);
      add(grad->col_map, px[1], g_c0);
      add(grad->col_map, px[0], -g_c0);
      add(grad->col_map, px[2], g_c1);
      add(grad->col_map, px[3], -g_c1);
    }
  }
  out.value = regress_sum / (2.0 * n) + map_sum / (4.0 * n);
  return out;
}

KeypointLoss keypoint_loss(const RawNetworkOutput& pred, const TargetBundle& target, const LossConfig& cfg,
                           RawNetworkOutput* grad) {
  check_pair(pred, target);
  if (!pred.heatmap.same_shape(target.heatmap)) throw_invalid("keypoint_loss: heatmap shapes differ");
  KeypointLoss out;
  const auto p_all = pred.heatmap.data();
  const auto g_all = target.heatmap.data();
  for (double g : g_all) out.positives += (g == 1.0);
  const double norm = std::max(out.positives, 1);

  const double a = cfg.focal_alpha;
  const double b = cfg.focal_beta;
  double focal = 0.0;
  for (std::size_t i = 0; i < p_all.size(); ++i) {
    const double raw = p_all[i];
    const double p = std::clamp(raw, kHeatmapClamp, 1.0 - kHeatmapClamp);
    const bool active = raw == p;
    const double g = g_all[i];
    double dldp = 0.0;
    if (g == 1.0) {
      focal += -std::pow(1.0 - p, a) * std::log(p);
      dldp = a * std::pow(1.0 - p, a - 1.0) * std::log(p) - std::pow(1.0 - p, a) / p;
    } else {
      const double w = std::pow(1.0 - g, b);
      focal += -w * std::pow(p, a) * std::log(1.0 - p);
      dldp = -w * (a * std::pow(p, a - 1.0) * std::log(1.0 - p) - std::pow(p, a) / (1.0 - p));
    }
    if (grad && active) grad->heatmap.data()[i] += dldp / norm;
  }
  out.heatmap = focal / norm;

  const int k = static_cast<int>(target.offsets.size());
  if (k > 0) {
    double sum = 0.0;
    for (const auto& o : target.offsets) {
      const double rx = pred.offsets.at(o.pixel.y, o.pixel.x, 0) - o.dx;
      const double ry = pred.offsets.at(o.pixel.y, o.pixel.x, 1) - o.dy;
      sum += std::abs(rx) + std::abs(ry);
      if (grad) {
        grad->offsets.at(o.pixel.y, o.pixel.x, 0) += sign(rx) / (2.0 * k);
        grad->offsets.at(o.pixel.y, o.pixel.x, 1) += sign(ry) / (2.0 * k);
      }
    }
    out.offset = sum / (2.0 * k);
  }
  return out;
}

OverallLoss overall_loss(const RawNetworkOutput& pred, const TargetBundle& target, const LossConfig& cfg,
                         bool with_gradient) {
  check_pair(pred, target);
  OverallLoss out;
  RawNetworkOutput* grad = nullptr;
  if (with_gradient) {
    out.gradient = make_zero_output(pred.meta);
    grad = &*out.gradient;
  }
  const KeypointLoss kp = keypoint_loss(pred, target, cfg, grad);
  SpatialLoss sp = spatial_loss(pred, target, cfg, grad);
  const BoundaryLoss bd = boundary_loss(pred.row_map, pred.col_map, target.row_map, target.col_map, target.mask,
                                        grad ? &grad->row_map : nullptr, grad ? &grad->col_map : nullptr);
  const SpanLoss sn = span_loss(pred, target, cfg, grad);

  out.warnings = std::move(sp.warnings);
  if (bd.empty_mask) out.warnings.push_back("boundary loss: empty mask");

  LossBreakdown& b = out.breakdown;
  b.keypoint = kp.heatmap;
  b.offset = kp.offset;
  b.spatial = sp.value;
  b.boundary = bd.value;
  b.span = sn.value;
  b.logical = b.boundary + b.span;
  b.overall = b.keypoint + b.offset + b.spatial + b.logical;
  return out;
}

std::string breakdown_to_json(const LossBreakdown& b) {
  nlohmann::ordered_json j;
  j["keypoint"] = b.keypoint;
  j["offset"] = b.offset;
  j["spatial"] = b.spatial;
  j["boundary"] = b.boundary;
  j["span"] = b.span;
  j["logical"] = b.logical;
  j["overall"] = b.overall;
  return j.dump(2) + "\n";
}

}  // namespace tsrkit
