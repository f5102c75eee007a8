#include "tsrkit/targets.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tsrkit/error.hpp"
#include "tsrkit/interpmap.hpp"

namespace tsrkit {

void check_loss_config(const LossConfig& cfg) {
  if (!(cfg.lambda_u > 0 && cfg.lambda_v > 0 && cfg.lambda_e > 0 && cfg.focal_alpha > 0 &&
        cfg.focal_beta > 0 && cfg.span_cap > 0))
    throw_invalid("LossConfig: all weights must be positive");
  if (cfg.downscale < 1) throw_invalid("LossConfig: downscale must be >= 1");
}

RawNetworkOutput make_zero_output(const OutputMeta& meta) {
  const int h = meta.lowres_height();
  const int w = meta.lowres_width();
  RawNetworkOutput out;
  out.heatmap = RasterMap(h, w, 2);
  out.offsets = RasterMap(h, w, 2);
  out.center2corners = RasterMap(h, w, 8);
  out.corners2center = RasterMap(h, w, 8);
  out.spans = RasterMap(h, w, 2);
  out.row_map = RasterMap(h, w, 1);
  out.col_map = RasterMap(h, w, 1);
  out.meta = meta;
  return out;
}

void check_output_shape(const RawNetworkOutput& raw) {
  const int h = raw.meta.lowres_height();
  const int w = raw.meta.lowres_width();
  auto check = [&](const RasterMap& m, int channels, const char* name) {
    if (m.height() != h || m.width() != w || m.channels() != channels)
      throw_invalid(std::string("network output '") + name + "' has shape " +
                    std::to_string(m.height()) + "x" + std::to_string(m.width()) + "x" +
                    std::to_string(m.channels()) + ", expected " + std::to_string(h) + "x" +
                    std::to_string(w) + "x" + std::to_string(channels));
  };
  check(raw.heatmap, 2, "heatmap");
  check(raw.offsets, 2, "offsets");
  check(raw.center2corners, 8, "center2corners");
  check(raw.corners2center, 8, "corners2center");
  check(raw.spans, 2, "spans");
  check(raw.row_map, 1, "row_map");
  check(raw.col_map, 1, "col_map");
}

int CornerTarget::valid_count() const {
  return static_cast<int>(std::count_if(slots.begin(), slots.end(),
                                        [](const CornerSlot& s) { return s.valid; }));
}

namespace {

struct CornerGroup {
  PixelIndex pixel;
  Point2 position;
  std::vector<std::pair<int, int>> members;  // (cell, corner k)
};

struct KeypointPlan {
  std::vector<Point2> centers;  // lowres
  std::vector<PixelIndex> center_pixels;
  std::vector<CornerGroup> corners;
  std::vector<std::array<int, 4>> cell_corner_group;
  std::vector<std::string> warnings;
};

PixelIndex pixel_of(Point2 p, int h, int w, std::vector<std::string>& warnings) {
  PixelIndex q{static_cast<int>(std::floor(p.y)), static_cast<int>(std::floor(p.x))};
  const PixelIndex clamped{std::clamp(q.y, 0, h - 1), std::clamp(q.x, 0, w - 1)};
  if (clamped != q) {
    warnings.push_back("keypoint (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                       ") outside lowres raster, clamped to border");
  }
  return clamped;
}

KeypointPlan plan_keypoints(const TableAnnotation& ann, const LossConfig& cfg) {
  check_loss_config(cfg);
  const OutputMeta meta{ann.image_height, ann.image_width, cfg.downscale};
  const int h = meta.lowres_height();
  const int w = meta.lowres_width();
  const double d = cfg.downscale;

  KeypointPlan plan;
  std::map<PixelIndex, int> group_of_pixel;
  plan.cell_corner_group.resize(ann.cells.size());
  for (std::size_t i = 0; i < ann.cells.size(); ++i) {
    const Quad& q = ann.cells[i].quad;
    const Point2 center = quad_center(q) * (1.0 / d);
    plan.centers.push_back(center);
    plan.center_pixels.push_back(pixel_of(center, h, w, plan.warnings));
    for (int k = 0; k < 4; ++k) {
      const Point2 corner = q[k] * (1.0 / d);
      const PixelIndex px = pixel_of(corner, h, w, plan.warnings);
      auto [it, inserted] = group_of_pixel.emplace(px, static_cast<int>(plan.corners.size()));
      if (inserted) plan.corners.push_back({px, corner, {}});
      plan.corners[it->second].members.emplace_back(static_cast<int>(i), k);
      plan.cell_corner_group[i][k] = it->second;
    }
  }
  return plan;
}

int cell_radius(const Quad& q, double d) {
  double min_x = q[0].x, max_x = q[0].x, min_y = q[0].y, max_y = q[0].y;
  for (const auto& p : q.corners) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double r = gaussian_radius((max_y - min_y) / d, (max_x - min_x) / d);
  return std::max(1, static_cast<int>(r));
}

void draw_gaussian(RasterMap& heat, int channel, PixelIndex at, int radius) {
  const double sigma = radius / 3.0;
  const double denom = 2.0 * sigma * sigma;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const int y = at.y + dy;
      const int x = at.x + dx;
      if (!heat.contains(y, x)) continue;
      const double v = std::exp(-(dx * dx + dy * dy) / denom);
      double& cell = heat.at(y, x, channel);
      cell = std::max(cell, v);
    }
  }
}

}  // namespace

double gaussian_radius(double height, double width, double min_overlap) {
  const double a1 = 1.0;
  const double b1 = height + width;
  const double c1 = width * height * (1.0 - min_overlap) / (1.0 + min_overlap);
  const double r1 = (b1 + std::sqrt(b1 * b1 - 4.0 * a1 * c1)) / 2.0;

  const double a2 = 4.0;
  const double b2 = 2.0 * (height + width);
  const double c2 = (1.0 - min_overlap) * width * height;
  const double r2 = (b2 + std::sqrt(b2 * b2 - 4.0 * a2 * c2)) / 2.0;

  const double a3 = 4.0 * min_overlap;
  const double b3 = -2.0 * min_overlap * (height + width);
  const double c3 = (min_overlap - 1.0) * width * height;
  const double r3 = (b3 + std::sqrt(b3 * b3 - 4.0 * a3 * c3)) / 2.0;
  return std::min({r1, r2, r3});
}

RasterMap splat_keypoints(const TableAnnotation& ann, const LossConfig& cfg,
                          std::vector<std::string>* warnings) {
  const KeypointPlan plan = plan_keypoints(ann, cfg);
  const OutputMeta meta{ann.image_height, ann.image_width, cfg.downscale};
  RasterMap heat(meta.lowres_height(), meta.lowres_width(), 2);
  const double d = cfg.downscale;

  std::vector<int> radius(ann.cells.size());
  for (std::size_t i = 0; i < ann.cells.size(); ++i) {
    radius[i] = cell_radius(ann.cells[i].quad, d);
    draw_gaussian(heat, kCenterChannel, plan.center_pixels[i], radius[i]);
  }
  for (const auto& group : plan.corners) {
    int r = radius[group.members.front().first];
    for (const auto& [cell, k] : group.members) r = std::min(r, radius[cell]);
    draw_gaussian(heat, kCornerChannel, group.pixel, r);
  }
  if (warnings) warnings->insert(warnings->end(), plan.warnings.begin(), plan.warnings.end());
  return heat;
}

std::vector<OffsetTarget> make_offsets(const TableAnnotation& ann, const LossConfig& cfg) {
  const KeypointPlan plan = plan_keypoints(ann, cfg);
  std::vector<OffsetTarget> out;
  out.reserve(plan.centers.size() + plan.corners.size());
  for (std::size_t i = 0; i < plan.centers.size(); ++i) {
    const PixelIndex px = plan.center_pixels[i];
    out.push_back({px, KeypointKind::Center, plan.centers[i].x - px.x, plan.centers[i].y - px.y});
  }
  for (const auto& g : plan.corners) {
    out.push_back({g.pixel, KeypointKind::Corner, g.position.x - g.pixel.x, g.position.y - g.pixel.y});
  }
  return out;
}

VectorTargets make_vector_targets(const TableAnnotation& ann, const LossConfig& cfg) {
  const KeypointPlan plan = plan_keypoints(ann, cfg);
  const double d = cfg.downscale;
  VectorTargets out;
  out.warnings = plan.warnings;

  out.links.resize(ann.cells.size());
  for (std::size_t i = 0; i < ann.cells.size(); ++i) {
    CenterTarget ct;
    ct.cell = static_cast<int>(i);
    ct.pixel = plan.center_pixels[i];
    ct.center = plan.centers[i];
    for (int k = 0; k < 4; ++k) {
      const Point2 corner = ann.cells[i].quad[k] * (1.0 / d);
      ct.u[2 * k] = corner.x - ct.center.x;
      ct.u[2 * k + 1] = corner.y - ct.center.y;
      out.links[i].corners[k] = corner;
    }
    out.links[i].center_entry = static_cast<int>(i);
    out.center2corners.push_back(ct);
  }

  for (std::size_t g = 0; g < plan.corners.size(); ++g) {
    const CornerGroup& group = plan.corners[g];
    std::vector<std::pair<int, int>> members = group.members;
    if (members.size() > 4) {
      std::stable_sort(members.begin(), members.end(), [&](const auto& a, const auto& b) {
        return shoelace_area(ann.cells[a.first].quad) > shoelace_area(ann.cells[b.first].quad);
      });
      out.warnings.push_back("corner pixel (" + std::to_string(group.pixel.y) + "," +
                             std::to_string(group.pixel.x) + ") shared by " +
                             std::to_string(members.size()) + " cells; keeping the 4 largest");
      for (std::size_t m = 4; m < members.size(); ++m) {
        out.links[members[m].first].corner_entry[members[m].second] = static_cast<int>(g);
        out.links[members[m].first].corner_slot[members[m].second] = -1;
      }
      members.resize(4);
    }
    std::stable_sort(members.begin(), members.end(), [&](const auto& a, const auto& b) {
      const LogicalLoc& la = ann.cells[a.first].logical;
      const LogicalLoc& lb = ann.cells[b.first].logical;
      return std::tie(la.row_start, la.col_start, a.first) < std::tie(lb.row_start, lb.col_start, b.first);
    });

    CornerTarget target;
    target.pixel = group.pixel;
    target.position = group.position;
    for (std::size_t s = 0; s < members.size(); ++s) {
      const auto [cell, k] = members[s];
      const Point2 v = plan.centers[cell] - group.position;
      target.slots[s] = {v.x, v.y, true, cell};
      out.links[cell].corner_entry[k] = static_cast<int>(g);
      out.links[cell].corner_slot[k] = static_cast<int>(s);
    }
    out.corners2center.push_back(target);
  }
  return out;
}

std::vector<SpanTarget> make_span_targets(const TableAnnotation& ann, const LossConfig& cfg) {
  const KeypointPlan plan = plan_keypoints(ann, cfg);
  std::vector<SpanTarget> out;
  out.reserve(ann.cells.size());
  for (std::size_t i = 0; i < ann.cells.size(); ++i) {
    const LogicalLoc& l = ann.cells[i].logical;
    out.push_back({static_cast<int>(i), plan.center_pixels[i], static_cast<double>(l.row_span()),
                   static_cast<double>(l.col_span())});
  }
  return out;
}

TargetBundle assemble_target_bundle(const TableAnnotation& ann, const LossConfig& cfg) {
  check_loss_config(cfg);
  if (ann.image_width < 1 || ann.image_height < 1)
    throw_invalid("assemble_target_bundle: image size must be positive");
  TargetBundle bundle;
  bundle.meta = {ann.image_height, ann.image_width, cfg.downscale};
  bundle.heatmap = splat_keypoints(ann, cfg, &bundle.warnings);
  bundle.offsets = make_offsets(ann, cfg);
  VectorTargets vectors = make_vector_targets(ann, cfg);
  bundle.center2corners = std::move(vectors.center2corners);
  bundle.corners2center = std::move(vectors.corners2center);
  bundle.links = std::move(vectors.links);
  for (auto& w : vectors.warnings) {
    if (std::find(bundle.warnings.begin(), bundle.warnings.end(), w) == bundle.warnings.end())
      bundle.warnings.push_back(std::move(w));
  }
  bundle.spans = make_span_targets(ann, cfg);

  InterpMaps maps = generate_interp_maps(ann);
  for (auto& w : maps.rows.warnings) bundle.warnings.push_back("row map: " + w);
  for (auto& w : maps.cols.warnings) bundle.warnings.push_back("col map: " + w);
  bundle.row_map = downsample_map(maps.rows.interp, cfg.downscale);
  bundle.col_map = downsample_map(maps.cols.interp, cfg.downscale);
  bundle.mask = downsample_map(maps.rows.mask, cfg.downscale);
  return bundle;
}

RawNetworkOutput targets_as_output(const TargetBundle& bundle) {
  RawNetworkOutput out = make_zero_output(bundle.meta);
  out.heatmap = bundle.heatmap;
  for (const auto& o : bundle.offsets) {
    out.offsets.at(o.pixel.y, o.pixel.x, 0) = o.dx;
    out.offsets.at(o.pixel.y, o.pixel.x, 1) = o.dy;
  }
  for (const auto& c : bundle.center2corners)
    for (int ch = 0; ch < 8; ++ch) out.center2corners.at(c.pixel.y, c.pixel.x, ch) = c.u[ch];
  for (const auto& c : bundle.corners2center) {
    for (int s = 0; s < 4; ++s) {
      out.corners2center.at(c.pixel.y, c.pixel.x, 2 * s) = c.slots[s].dx;
      out.corners2center.at(c.pixel.y, c.pixel.x, 2 * s + 1) = c.slots[s].dy;
    }
  }
  for (const auto& s : bundle.spans) {
    out.spans.at(s.pixel.y, s.pixel.x, 0) = s.row_span;
    out.spans.at(s.pixel.y, s.pixel.x, 1) = s.col_span;
  }
  out.row_map = bundle.row_map;
  out.col_map = bundle.col_map;
  return out;
}

}  // namespace tsrkit
