#include "tsrkit/interpmap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tsrkit/error.hpp"

namespace tsrkit {

namespace {

double orient(Point2 a, Point2 b, Point2 c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// > 0 when d is strictly inside the circumcircle of a, b, c (any orientation).
double in_circle(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  const double det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                     ad * (bdx * cdy - bdy * cdx);
  return orient(a, b, c) > 0.0 ? det : -det;
}

// Precomputed barycentric frame of one triangle in local grid coordinates.
struct Triangle {
  double x1, y1, x2, y2, x3, y3;
  double o1, o2, o3;
  double det;
  bool usable;

  Triangle(const InterpVertex& a, const InterpVertex& b, const InterpVertex& c)
      : x1(a.x), y1(a.y), x2(b.x), y2(b.y), x3(c.x), y3(c.y), o1(a.o), o2(b.o), o3(c.o) {
    det = (y2 - y3) * (x1 - x3) + (x3 - x2) * (y1 - y3);
    const double scale = std::max({std::abs(x1 - x3), std::abs(y1 - y3), std::abs(x2 - x3),
                                   std::abs(y2 - y3), 1.0});
    usable = std::abs(det) > 1e-12 * scale * scale;
  }

  // Returns false when (px, py) falls outside; otherwise writes the value.
  bool sample(double px, double py, double& value) const {
    const double l1 = ((y2 - y3) * (px - x3) + (x3 - x2) * (py - y3)) / det;
    const double l2 = ((y3 - y1) * (px - x3) + (x1 - x3) * (py - y3)) / det;
    const double l3 = 1.0 - l1 - l2;
    if (l1 < kBarycentricTolerance || l2 < kBarycentricTolerance || l3 < kBarycentricTolerance)
      return false;
    value = l1 * o1 + l2 * o2 + l3 * o3;
    return true;
  }

  double min_x() const { return std::min({x1, x2, x3}); }
  double max_x() const { return std::max({x1, x2, x3}); }
  double min_y() const { return std::min({y1, y2, y3}); }
  double max_y() const { return std::max({y1, y2, y3}); }
};

double polygon_area(const InterpPolygon& p) {
  Quad q;
  for (int k = 0; k < 4; ++k) q[k] = {p.vertices[k].x, p.vertices[k].y};
  return shoelace_area(q);
}

bool all_collinear(const std::array<Point2, 4>& pts) {
  double scale = 1.0;
  for (const auto& p : pts) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  const double tol = 1e-12 * scale * scale;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      for (int c = b + 1; c < 4; ++c)
        if (std::abs(orient(pts[a], pts[b], pts[c])) > tol) return false;
  return true;
}

}  // namespace

std::vector<InterpPolygon> build_row_polygons(const TableAnnotation& ann) {
  std::vector<InterpPolygon> out;
  out.reserve(ann.cells.size());
  for (const auto& cell : ann.cells) {
    const double top = cell.logical.row_start;
    const double bottom = cell.logical.row_end + 1;
    const std::array<double, 4> o = {top, top, bottom, bottom};
    InterpPolygon poly;
    for (int k = 0; k < 4; ++k) poly.vertices[k] = {cell.quad[k].x, cell.quad[k].y, o[k]};
    out.push_back(poly);
  }
  return out;
}

std::vector<InterpPolygon> build_col_polygons(const TableAnnotation& ann) {
  std::vector<InterpPolygon> out;
  out.reserve(ann.cells.size());
  for (const auto& cell : ann.cells) {
    const double left = cell.logical.col_start;
    const double right = cell.logical.col_end + 1;
    const std::array<double, 4> o = {left, right, right, left};
    InterpPolygon poly;
    for (int k = 0; k < 4; ++k) poly.vertices[k] = {cell.quad[k].x, cell.quad[k].y, o[k]};
    out.push_back(poly);
  }
  return out;
}

QuadSplit delaunay_quad_split(const std::array<Point2, 4>& pts) {
  constexpr QuadSplit kDiagonal13 = {{{0, 1, 2}, {0, 2, 3}}};
  constexpr QuadSplit kDiagonal24 = {{{0, 1, 3}, {1, 2, 3}}};
  double scale = 1.0;
  for (const auto& p : pts) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  const double tol = 1e-12 * scale * scale * scale * scale;
  return in_circle(pts[0], pts[1], pts[2], pts[3]) > tol ? kDiagonal24 : kDiagonal13;
}

InterpResult interpolate_polygons(std::span<const InterpPolygon> polygons, int height, int width) {
  if (height < 1 || width < 1) throw_invalid("interpolate_polygons: raster must be at least 1x1");
  InterpResult result{RasterMap(height, width, 1, 0.0), RasterMap(height, width, 1, 0.0), {}};

  std::vector<double> areas(polygons.size());
  for (std::size_t k = 0; k < polygons.size(); ++k) areas[k] = polygon_area(polygons[k]);
  std::vector<std::size_t> order(polygons.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return areas[a] < areas[b]; });

  auto interp = result.interp.data();
  auto mask = result.mask.data();

  for (std::size_t k : order) {
    const InterpPolygon& poly = polygons[k];
    double min_x = poly.vertices[0].x, max_x = min_x;
    double min_y = poly.vertices[0].y, max_y = min_y;
    for (const auto& v : poly.vertices) {
      min_x = std::min(min_x, v.x);
      max_x = std::max(max_x, v.x);
      min_y = std::min(min_y, v.y);
      max_y = std::max(max_y, v.y);
    }
    const int x0 = static_cast<int>(std::floor(min_x));
    const int y0 = static_cast<int>(std::floor(min_y));
    const int w = static_cast<int>(std::ceil(max_x)) - x0 + 1;
    const int h = static_cast<int>(std::ceil(max_y)) - y0 + 1;

    std::array<InterpVertex, 4> local{};
    std::array<Point2, 4> local_xy{};
    for (int i = 0; i < 4; ++i) {
      local[i] = {poly.vertices[i].x - x0, poly.vertices[i].y - y0, poly.vertices[i].o};
      local_xy[i] = {local[i].x, local[i].y};
    }
    if (all_collinear(local_xy)) {
      result.warnings.push_back("polygon " + std::to_string(k) +
                                " skipped: fewer than 3 non-collinear vertices");
      continue;
    }
    const QuadSplit split = delaunay_quad_split(local_xy);
    const Triangle first(local[split[0][0]], local[split[0][1]], local[split[0][2]]);
    const Triangle second(local[split[1][0]], local[split[1][1]], local[split[1][2]]);
    const std::array<const Triangle*, 2> tris = {&first, &second};

    for (int t = 0; t < 2; ++t) {
      const Triangle& tri = *tris[t];
      if (!tri.usable) continue;
      const int i_lo = std::max({0, static_cast<int>(std::floor(tri.min_x())) - 1, -x0});
      const int i_hi = std::min({w - 1, static_cast<int>(std::ceil(tri.max_x())) + 1, width - 1 - x0});
      const int j_lo = std::max({0, static_cast<int>(std::floor(tri.min_y())) - 1, -y0});
      const int j_hi = std::min({h - 1, static_cast<int>(std::ceil(tri.max_y())) + 1, height - 1 - y0});
      for (int j = j_lo; j <= j_hi; ++j) {
        const std::size_t row = static_cast<std::size_t>(j + y0) * width;
        for (int i = i_lo; i <= i_hi; ++i) {
          double q = 0.0;
          if (!tri.sample(i, j, q)) continue;
          // A grid point takes its value from the first triangle containing it.
          if (t == 1 && first.usable) {
            double ignored = 0.0;
            if (first.sample(i, j, ignored)) continue;
          }
          const std::size_t idx = row + static_cast<std::size_t>(i + x0);
          // Inside points carry q >= 0 up to rounding in the tolerance band;
          // clamping keeps row and column masks identical.
          if (mask[idx] == 0.0) {
            interp[idx] = std::max(q, 0.0);
            mask[idx] = 1.0;
          }
        }
      }
    }
  }
  return result;
}

InterpMaps generate_interp_maps(const TableAnnotation& ann) {
  const auto rows = build_row_polygons(ann);
  const auto cols = build_col_polygons(ann);
  InterpMaps maps{interpolate_polygons(rows, ann.image_height, ann.image_width),
                  interpolate_polygons(cols, ann.image_height, ann.image_width)};
  if (maps.rows.mask != maps.cols.mask) throw_internal("generate_interp_maps: row/col masks differ");
  return maps;
}

RasterMap downsample_map(const RasterMap& map, int factor) {
  if (factor < 1) throw_invalid("downsample_map: factor must be >= 1");
  const int out_h = (map.height() + factor - 1) / factor;
  const int out_w = (map.width() + factor - 1) / factor;
  RasterMap out(out_h, out_w, map.channels());
  for (int j = 0; j < out_h; ++j)
    for (int i = 0; i < out_w; ++i)
      for (int c = 0; c < map.channels(); ++c) out.at(j, i, c) = map.at(j * factor, i * factor, c);
  return out;
}

}  // namespace tsrkit
