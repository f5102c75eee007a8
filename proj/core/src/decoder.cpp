#include "tsrkit/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "tsrkit/error.hpp"

namespace tsrkit {

std::vector<Keypoint> extract_peaks(const RasterMap& heatmap, int channel, const RasterMap& offsets,
                                    double tau, int max_k) {
  if (channel < 0 || channel >= heatmap.channels()) throw_invalid("extract_peaks: bad channel");
  if (!(tau > 0.0 && tau < 1.0) || max_k < 1) throw_invalid("extract_peaks: tau must be in (0,1), max_k >= 1");
  const int h = heatmap.height();
  const int w = heatmap.width();
  std::vector<Keypoint> peaks;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = heatmap.at(y, x, channel);
      if (!(v >= tau)) continue;
      bool is_peak = true;
      for (int dy = -1; dy <= 1 && is_peak; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const int ny = y + dy;
          const int nx = x + dx;
          if (!heatmap.contains(ny, nx)) continue;
          const double nv = heatmap.at(ny, nx, channel);
          const bool precedes = dy < 0 || (dy == 0 && dx < 0);
          if (nv > v || (precedes && nv == v)) {
            is_peak = false;
            break;
          }
        }
      }
      if (!is_peak) continue;
      Keypoint kp;
      kp.pixel_y = y;
      kp.pixel_x = x;
      kp.score = v;
      kp.position = {x + offsets.at(y, x, 0), y + offsets.at(y, x, 1)};
      kp.kind = channel == kCenterChannel ? KeypointKindTag::Center : KeypointKindTag::Corner;
      peaks.push_back(kp);
    }
  }
  // Row-major discovery order is the tie-break.
  std::stable_sort(peaks.begin(), peaks.end(), [](const Keypoint& a, const Keypoint& b) { return a.score > b.score; });
  if (static_cast<int>(peaks.size()) > max_k) peaks.resize(max_k);
  return peaks;
}

std::vector<ApproxCell> regress_cells(const std::vector<Keypoint>& centers, const RasterMap& center2corners,
                                      const RasterMap& spans) {
  std::vector<ApproxCell> cells;
  cells.reserve(centers.size());
  for (const auto& c : centers) {
    ApproxCell cell;
    cell.center = c.position;
    cell.pixel_y = c.pixel_y;
    cell.pixel_x = c.pixel_x;
    cell.score = c.score;
    for (int k = 0; k < 4; ++k) {
      cell.quad[k] = {c.position.x + center2corners.at(c.pixel_y, c.pixel_x, 2 * k),
                      c.position.y + center2corners.at(c.pixel_y, c.pixel_x, 2 * k + 1)};
    }
    cell.row_span = spans.at(c.pixel_y, c.pixel_x, 0);
    cell.col_span = spans.at(c.pixel_y, c.pixel_x, 1);
    if (shoelace_area(cell.quad) <= 1e-12) cell.flags |= kFlagDegenerate;
    cells.push_back(cell);
  }
  return cells;
}

void align_corners(std::vector<ApproxCell>& cells, const std::vector<Keypoint>& corners,
                   const RasterMap& corners2center, const DecodeConfig& cfg) {
  if (corners.empty()) return;
  // Bucket corner keypoints by lowres pixel for radius queries.
  const int h = corners2center.height();
  const int w = corners2center.width();
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(h) * w);
  for (std::size_t i = 0; i < corners.size(); ++i)
    buckets[static_cast<std::size_t>(corners[i].pixel_y) * w + corners[i].pixel_x].push_back(static_cast<int>(i));

  const int reach = static_cast<int>(std::ceil(cfg.align_radius)) + 1;
  const double r2 = cfg.align_radius * cfg.align_radius;
  const double e2 = cfg.back_epsilon * cfg.back_epsilon;

  auto points_back = [&](const Keypoint& kp, Point2 center) {
    for (int s = 0; s < 4; ++s) {
      const Point2 target = {kp.position.x + corners2center.at(kp.pixel_y, kp.pixel_x, 2 * s),
                             kp.position.y + corners2center.at(kp.pixel_y, kp.pixel_x, 2 * s + 1)};
      const Point2 d = target - center;
      if (d.x * d.x + d.y * d.y <= e2) return true;
    }
    return false;
  };

  for (auto& cell : cells) {
    for (int k = 0; k < 4; ++k) {
      const Point2 p = cell.quad[k];
      const int py = static_cast<int>(std::floor(p.y));
      const int px = static_cast<int>(std::floor(p.x));
      std::vector<std::pair<double, int>> candidates;
      for (int y = std::max(0, py - reach); y <= std::min(h - 1, py + reach); ++y) {
        for (int x = std::max(0, px - reach); x <= std::min(w - 1, px + reach); ++x) {
          for (int idx : buckets[static_cast<std::size_t>(y) * w + x]) {
            const Point2 d = corners[idx].position - p;
            const double dist2 = d.x * d.x + d.y * d.y;
            if (dist2 <= r2) candidates.emplace_back(dist2, idx);
          }
        }
      }
      std::sort(candidates.begin(), candidates.end());
      for (const auto& [dist2, idx] : candidates) {
        if (points_back(corners[idx], cell.center)) {
          cell.quad[k] = corners[idx].position;
          cell.snapped[k] = true;
          break;
        }
      }
    }
  }
}

LogicalLoc assign_logical(const ApproxCell& cell, const RasterMap& row_map, const RasterMap& col_map,
                          const DecodeConfig& cfg, unsigned* flags) {
  unsigned f = 0;
  Point2 at = cell.quad[0];
  if (cfg.sample_inset > 0.0) {
    auto inset_along = [&](Point2 to) {
      const Point2 d = to - cell.quad[0];
      const double len = std::hypot(d.x, d.y);
      if (len <= 0.0) return Point2{};
      const double step = std::min(cfg.sample_inset, len / 3.0);
      return d * (step / len);
    };
    at = at + inset_along(cell.quad[1]) + inset_along(cell.quad[3]);
  }
  const int h = row_map.height();
  const int w = row_map.width();
  const int y = static_cast<int>(std::floor(at.y + 0.5));
  const int x = static_cast<int>(std::floor(at.x + 0.5));
  const int cy = std::clamp(y, 0, h - 1);
  const int cx = std::clamp(x, 0, w - 1);
  if (cy != y || cx != x) f |= kFlagLookupClamped;

  auto start_index = [&](double v, unsigned flag) {
    double r = std::round(v);
    if (!std::isfinite(v) || v < 0.0) {
      f |= flag;
      if (!std::isfinite(r) || r < 0.0) r = 0.0;
    }
    r = std::max(r, 0.0);  // round(-0.2) is -0
    return static_cast<int>(std::min(r, static_cast<double>(std::numeric_limits<int>::max() / 2)));
  };
  auto span_count = [&](double s, unsigned flag) {
    double fl = std::floor(s);
    if (!std::isfinite(fl) || fl < 1.0) {
      f |= flag;
      fl = 1.0;
    }
    return static_cast<int>(std::min(fl, 1e6));
  };

  LogicalLoc l;
  l.row_start = start_index(row_map.at(cy, cx), kFlagRowStartClamped);
  l.col_start = start_index(col_map.at(cy, cx), kFlagColStartClamped);
  l.row_end = l.row_start + span_count(cell.row_span, kFlagRowSpanClamped) - 1;
  l.col_end = l.col_start + span_count(cell.col_span, kFlagColSpanClamped) - 1;
  if (flags) *flags |= f;
  return l;
}

DecodedTable decode_table(const RawNetworkOutput& raw, const DecodeConfig& cfg) {
  check_output_shape(raw);
  DecodedTable out;
  out.annotation.image_width = raw.meta.width;
  out.annotation.image_height = raw.meta.height;

  const auto centers = extract_peaks(raw.heatmap, kCenterChannel, raw.offsets, cfg.tau_center, cfg.max_k);
  if (centers.empty()) return out;
  const auto corners = extract_peaks(raw.heatmap, kCornerChannel, raw.offsets, cfg.tau_corner, cfg.max_k);

  std::vector<ApproxCell> cells = regress_cells(centers, raw.center2corners, raw.spans);
  align_corners(cells, corners, raw.corners2center, cfg);

  const double scale = raw.meta.downscale;
  for (auto& cell : cells) {
    unsigned flags = cell.flags;
    const LogicalLoc logical = assign_logical(cell, raw.row_map, raw.col_map, cfg, &flags);

    Quad quad;
    for (int k = 0; k < 4; ++k) {
      Point2 p = cell.quad[k] * scale;
      const Point2 clamped = {std::clamp(p.x, 0.0, static_cast<double>(raw.meta.width)),
                              std::clamp(p.y, 0.0, static_cast<double>(raw.meta.height))};
      if (!(clamped == p)) flags |= kFlagCoordinateClamped;
      quad[k] = clamped;
    }
    if (shoelace_area(quad) <= 1e-12) flags |= kFlagDegenerate;
    out.annotation.cells.push_back({normalize_quad(quad), logical});
    out.scores.push_back(cell.score);
    out.diagnostics.push_back(
        {static_cast<int>(std::count(cell.snapped.begin(), cell.snapped.end(), true)), flags});
  }

  const auto& cs = out.annotation.cells;
  for (std::size_t i = 0; i < cs.size(); ++i)
    for (std::size_t j = i + 1; j < cs.size(); ++j)
      if (logical_overlap(cs[i].logical, cs[j].logical))
        out.logical_conflicts.emplace_back(static_cast<int>(i), static_cast<int>(j));
  return out;
}

std::string diagnostics_to_json(const DecodedTable& table) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < table.diagnostics.size(); ++i) {
    const auto& d = table.diagnostics[i];
    nlohmann::ordered_json flags = nlohmann::ordered_json::array();
    const std::pair<unsigned, const char*> names[] = {
        {kFlagDegenerate, "degenerate"},           {kFlagRowStartClamped, "row_start_clamped"},
        {kFlagColStartClamped, "col_start_clamped"}, {kFlagRowSpanClamped, "row_span_clamped"},
        {kFlagColSpanClamped, "col_span_clamped"},   {kFlagLookupClamped, "lookup_clamped"},
        {kFlagCoordinateClamped, "coordinate_clamped"}};
    for (const auto& [bit, name] : names)
      if (d.flags & bit) flags.push_back(name);
    cells.push_back({{"index", i}, {"score", table.scores[i]}, {"aligned_corners", d.aligned_corners},
                     {"flags", flags}});
  }
  doc["cell_count"] = table.diagnostics.size();
  doc["cells"] = std::move(cells);
  nlohmann::ordered_json conflicts = nlohmann::ordered_json::array();
  for (const auto& [a, b] : table.logical_conflicts) conflicts.push_back({a, b});
  doc["logical_conflicts"] = std::move(conflicts);
  return doc.dump(2) + "\n";
}

}  // namespace tsrkit
