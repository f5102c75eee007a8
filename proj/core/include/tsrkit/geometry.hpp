#pragma once

#include <array>
#include <compare>
#include <string>
#include <vector>

namespace tsrkit {

/// Image-space point. Origin top-left, x to the right, y downward; pixel
/// centers sit on integer coordinates.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }

/// Cell boundary: four corners clockwise (in y-down image coordinates)
/// starting from the upper-left corner.
struct Quad {
  std::array<Point2, 4> corners{};

  Point2& operator[](std::size_t k) { return corners[k]; }
  const Point2& operator[](std::size_t k) const { return corners[k]; }

  friend bool operator==(const Quad&, const Quad&) = default;
};

/// Inclusive logical index ranges of a cell.
struct LogicalLoc {
  int row_start = 0;
  int row_end = 0;
  int col_start = 0;
  int col_end = 0;

  int row_span() const { return row_end - row_start + 1; }
  int col_span() const { return col_end - col_start + 1; }

  friend auto operator<=>(const LogicalLoc&, const LogicalLoc&) = default;
};

struct Cell {
  Quad quad;
  LogicalLoc logical;

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct TableAnnotation {
  std::vector<Cell> cells;
  int image_width = 0;
  int image_height = 0;

  friend bool operator==(const TableAnnotation&, const TableAnnotation&) = default;
};

/// Signed shoelace area; positive for clockwise quads in image coordinates.
double signed_area(const Quad& quad);

/// |signed_area|. Degenerate quads give 0.
double shoelace_area(const Quad& quad);

/// Arithmetic mean of the four corners.
Point2 quad_center(const Quad& quad);

/// True when every turn is clockwise or straight (within a scale-relative
/// tolerance) and the area is positive.
bool is_convex(const Quad& quad);

/// Reorders corners into the canonical order: clockwise, starting at the
/// corner minimizing x + y (ties: smaller x).
Quad normalize_quad(const Quad& quad);

/// Intersection over union of two convex quads. Zero-area inputs give 0.
/// Throws TsrError(InvalidInput) if either quad is concave.
double polygon_iou(const Quad& a, const Quad& b);

/// Area of the intersection of two convex clockwise polygons.
double convex_intersection_area(const std::vector<Point2>& subject,
                                const std::vector<Point2>& clip);

/// True when the two inclusive logical rectangles share at least one
/// (row, col) index pair.
bool logical_overlap(const LogicalLoc& a, const LogicalLoc& b);

enum class ViolationKind {
  BadImageSize,
  NonFinite,
  OutOfBounds,
  Degenerate,
  NotClockwise,
  Concave,
  BadLogical,
  DuplicateLogical,
  OverlappingLogical,
};

const char* to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  int cell = -1;
  int other_cell = -1;
  std::string message;
};

struct ValidationOptions {
  bool check_logical_overlap = true;
  double bounds_tolerance = 1e-6;
};

/// Reports every violated invariant; never throws, never mutates.
std::vector<Violation> validate_annotation(const TableAnnotation& ann,
                                           const ValidationOptions& options = {});

std::string format_report(const std::vector<Violation>& report);

}  // namespace tsrkit
