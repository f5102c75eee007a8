#include "tsrkit/gridify.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tsrkit/error.hpp"

namespace tsrkit {

namespace {

const char* axis_name(DividerAxis axis) { return axis == DividerAxis::Row ? "row" : "column"; }

int distinct_points(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](Point2 p, Point2 q) { return p.x < q.x || (p.x == q.x && p.y < q.y); });
  return static_cast<int>(std::unique(pts.begin(), pts.end()) - pts.begin());
}

void orient(DividerLine& d) {
  const bool flip = d.axis == DividerAxis::Row ? (d.b < 0.0 || (d.b == 0.0 && d.a < 0.0))
                                               : (d.a < 0.0 || (d.a == 0.0 && d.b < 0.0));
  if (flip) {
    d.a = -d.a;
    d.b = -d.b;
    d.c = -d.c;
  }
}

void fit_line(DividerLine& d) {
  const double n = static_cast<double>(d.support.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : d.support) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& p : d.support) {
    const double dx = p.x - mx;
    const double dy = p.y - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxy == 0.0) {
    // Axis-aligned support: keep the normal exact.
    if (sxx >= syy) {
      d.a = 0.0;
      d.b = 1.0;
    } else {
      d.a = 1.0;
      d.b = 0.0;
    }
  } else {
    const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);  // direction of the line
    d.a = -std::sin(theta);
    d.b = std::cos(theta);
  }
  d.c = -(d.a * mx + d.b * my);
  orient(d);
  double residual = 0.0;
  for (const auto& p : d.support) residual += std::abs(d.distance(p));
  d.mean_residual = residual / n;
  d.fitted = true;
}

}  // namespace

Dividers group_dividers(const TableAnnotation& ann) {
  int rows = 0;
  int cols = 0;
  for (const auto& cell : ann.cells) {
    rows = std::max(rows, cell.logical.row_end + 1);
    cols = std::max(cols, cell.logical.col_end + 1);
  }
  Dividers out;
  out.rows.resize(ann.cells.empty() ? 0 : rows + 1);
  out.columns.resize(ann.cells.empty() ? 0 : cols + 1);
  for (int i = 0; i < static_cast<int>(out.rows.size()); ++i) {
    out.rows[i].axis = DividerAxis::Row;
    out.rows[i].index = i;
  }
  for (int i = 0; i < static_cast<int>(out.columns.size()); ++i) {
    out.columns[i].axis = DividerAxis::Column;
    out.columns[i].index = i;
  }

  for (const auto& cell : ann.cells) {
    const auto& l = cell.logical;
    const auto& q = cell.quad;
    out.rows[l.row_start].support.push_back(q[0]);
    out.rows[l.row_start].support.push_back(q[1]);
    out.rows[l.row_end + 1].support.push_back(q[3]);
    out.rows[l.row_end + 1].support.push_back(q[2]);
    out.columns[l.col_start].support.push_back(q[0]);
    out.columns[l.col_start].support.push_back(q[3]);
    out.columns[l.col_end + 1].support.push_back(q[1]);
    out.columns[l.col_end + 1].support.push_back(q[2]);
  }
  return out;
}

void fit_and_complete(std::vector<DividerLine>& dividers, const GridifyOptions& options) {
  if (dividers.size() < 2) throw_invalid("ungriddable annotation: fewer than two dividers");
  std::vector<int> fitted;
  for (auto& d : dividers) {
    d.fitted = false;
    d.synthesized = false;
    if (distinct_points(d.support) < 2) continue;
    fit_line(d);
    if (d.mean_residual > options.max_mean_residual)
      throw_invalid(std::string("ungriddable annotation: ") + axis_name(d.axis) + " divider " +
                    std::to_string(d.index) + " deviates from a straight line by " +
                    std::to_string(d.mean_residual) + " px on average");
    fitted.push_back(d.index);
  }
  const DividerLine& first = dividers.front();
  const DividerLine& last = dividers.back();
  if (!first.fitted || !last.fitted)
    throw_invalid(std::string("ungriddable annotation: outer ") + axis_name(first.axis) +
                  " divider " + std::to_string(first.fitted ? last.index : first.index) +
                  " has fewer than two support points");

  for (auto& d : dividers) {
    if (d.fitted) continue;
    const auto above = std::upper_bound(fitted.begin(), fitted.end(), d.index);
    const DividerLine& hi = dividers[*above];
    const DividerLine& lo = dividers[*(above - 1)];
    const double t = static_cast<double>(d.index - lo.index) / (hi.index - lo.index);
    double a = (1.0 - t) * lo.a + t * hi.a;
    double b = (1.0 - t) * lo.b + t * hi.b;
    double c = (1.0 - t) * lo.c + t * hi.c;
    const double norm = std::hypot(a, b);
    if (!(norm > 0.0))
      throw_invalid(std::string("ungriddable annotation: cannot blend ") + axis_name(d.axis) + " divider " +
                    std::to_string(d.index));
    d.a = a / norm;
    d.b = b / norm;
    d.c = c / norm;
    d.synthesized = true;
  }
}

Point2 intersect(const DividerLine& row, const DividerLine& column, const GridifyOptions& options) {
  const double det = row.a * column.b - column.a * row.b;
  if (std::abs(det) < options.min_determinant)
    throw_invalid("near-parallel dividers: row " + std::to_string(row.index) + " and column " +
                  std::to_string(column.index));
  return {(row.b * column.c - column.b * row.c) / det, (column.a * row.c - row.a * column.c) / det};
}

TableAnnotation cells_to_grids(const TableAnnotation& ann, const GridifyOptions& options) {
  TableAnnotation out;
  out.image_width = ann.image_width;
  out.image_height = ann.image_height;
  if (ann.cells.empty()) return out;

  Dividers div = group_dividers(ann);
  fit_and_complete(div.rows, options);
  fit_and_complete(div.columns, options);

  const int rows = static_cast<int>(div.rows.size()) - 1;
  const int cols = static_cast<int>(div.columns.size()) - 1;
  std::vector<Point2> grid(static_cast<std::size_t>(rows + 1) * (cols + 1));
  for (int r = 0; r <= rows; ++r)
    for (int c = 0; c <= cols; ++c) grid[static_cast<std::size_t>(r) * (cols + 1) + c] = intersect(div.rows[r], div.columns[c], options);
  auto at = [&](int r, int c) { return grid[static_cast<std::size_t>(r) * (cols + 1) + c]; };

  out.cells.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Quad q;
      q[0] = at(r, c);
      q[1] = at(r, c + 1);
      q[2] = at(r + 1, c + 1);
      q[3] = at(r + 1, c);
      out.cells.push_back({normalize_quad(q), {r, r, c, c}});
    }
  }
  return out;
}

}  // namespace tsrkit
