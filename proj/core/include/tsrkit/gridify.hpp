#pragma once

#include <utility>
#include <vector>

#include "tsrkit/geometry.hpp"

namespace tsrkit {

enum class DividerAxis { Row, Column };

/// Line a*x + b*y + c = 0 with a^2 + b^2 = 1. Row dividers keep b > 0,
/// column dividers keep a > 0, so coefficient-wise blending is meaningful.
struct DividerLine {
  DividerAxis axis = DividerAxis::Row;
  int index = 0;
  std::vector<Point2> support;
  bool fitted = false;
  bool synthesized = false;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double mean_residual = 0.0;

  double distance(Point2 p) const { return a * p.x + b * p.y + c; }
};

struct Dividers {
  std::vector<DividerLine> rows;     // indices 0..R
  std::vector<DividerLine> columns;  // indices 0..C
};

Dividers group_dividers(const TableAnnotation& ann);

struct GridifyOptions {
  double max_mean_residual = 3.0;  // px
  double min_determinant = 1e-9;
};

/// Total-least-squares fit of every divider with two or more distinct
/// support points. The rest are blended from the nearest fitted dividers on
/// either side, weighted by index distance. Throws InvalidInput if an
/// extreme divider is unsupported or a fit is too far from its points.
void fit_and_complete(std::vector<DividerLine>& dividers, const GridifyOptions& options = {});

/// Intersection of a row and a column divider.
Point2 intersect(const DividerLine& row, const DividerLine& column, const GridifyOptions& options = {});

/// Splits spanning cells into unit grid cells bounded by the fitted
/// dividers. Output cells are in row-major order.
TableAnnotation cells_to_grids(const TableAnnotation& ann, const GridifyOptions& options = {});

}  // namespace tsrkit
