#include "tsrkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "tsrkit/error.hpp"

namespace tsrkit {

namespace {

double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

double polygon_signed_area(const std::vector<Point2>& poly) {
  double sum = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % poly.size()];
    sum += p.x * q.y - q.x * p.y;
  }
  return 0.5 * sum;
}

double quad_scale(const Quad& q) {
  double s = 0.0;
  for (const auto& p : q.corners) s = std::max({s, std::abs(p.x), std::abs(p.y)});
  return std::max(s, 1.0);
}

// Intersection of segment p->q with the infinite line through a->b.
Point2 line_intersection(Point2 p, Point2 q, Point2 a, Point2 b) {
  const Point2 r = q - p;
  const Point2 s = b - a;
  const double denom = cross(r, s);
  if (denom == 0.0) return p;
  const double t = cross(a - p, s) / denom;
  return p + r * t;
}

}  // namespace

double signed_area(const Quad& quad) {
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Point2& p = quad[i];
    const Point2& q = quad[(i + 1) % 4];
    sum += p.x * q.y - q.x * p.y;
  }
  return 0.5 * sum;
}

double shoelace_area(const Quad& quad) { return std::abs(signed_area(quad)); }

Point2 quad_center(const Quad& quad) {
  Point2 c{};
  for (const auto& p : quad.corners) c = c + p;
  return c * 0.25;
}

bool is_convex(const Quad& quad) {
  const double scale = quad_scale(quad);
  const double tol = 1e-12 * scale * scale;
  if (signed_area(quad) <= tol) return false;
  for (int i = 0; i < 4; ++i) {
    const Point2 e0 = quad[(i + 1) % 4] - quad[i];
    const Point2 e1 = quad[(i + 2) % 4] - quad[(i + 1) % 4];
    if (cross(e0, e1) < -tol) return false;
  }
  return true;
}

Quad normalize_quad(const Quad& quad) {
  Quad q = quad;
  if (signed_area(q) < 0.0) std::swap(q[1], q[3]);
  int start = 0;
  for (int k = 1; k < 4; ++k) {
    const double sk = q[k].x + q[k].y;
    const double ss = q[start].x + q[start].y;
    if (sk < ss || (sk == ss && q[k].x < q[start].x)) start = k;
  }
  Quad out;
  for (int k = 0; k < 4; ++k) out[k] = q[(start + k) % 4];
  return out;
}

double convex_intersection_area(const std::vector<Point2>& subject,
                                const std::vector<Point2>& clip) {
  std::vector<Point2> output = subject;
  for (std::size_t e = 0; e < clip.size() && !output.empty(); ++e) {
    const Point2 a = clip[e];
    const Point2 b = clip[(e + 1) % clip.size()];
    const Point2 edge = b - a;
    std::vector<Point2> input;
    input.swap(output);
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Point2 cur = input[i];
      const Point2 prev = input[(i + input.size() - 1) % input.size()];
      const bool cur_in = cross(edge, cur - a) >= 0.0;
      const bool prev_in = cross(edge, prev - a) >= 0.0;
      if (cur_in) {
        if (!prev_in) output.push_back(line_intersection(prev, cur, a, b));
        output.push_back(cur);
      } else if (prev_in) {
        output.push_back(line_intersection(prev, cur, a, b));
      }
    }
  }
  if (output.size() < 3) return 0.0;
  return std::abs(polygon_signed_area(output));
}

double polygon_iou(const Quad& a, const Quad& b) {
  const double area_a = shoelace_area(a);
  const double area_b = shoelace_area(b);
  if (area_a <= 0.0 || area_b <= 0.0) return 0.0;
  const Quad na = normalize_quad(a);
  const Quad nb = normalize_quad(b);
  if (!is_convex(na) || !is_convex(nb)) throw_invalid("polygon_iou: concave quad");
  const std::vector<Point2> pa(na.corners.begin(), na.corners.end());
  const std::vector<Point2> pb(nb.corners.begin(), nb.corners.end());
  const double inter = convex_intersection_area(pa, pb);
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

bool logical_overlap(const LogicalLoc& a, const LogicalLoc& b) {
  return a.row_start <= b.row_end && b.row_start <= a.row_end &&
         a.col_start <= b.col_end && b.col_start <= a.col_end;
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::BadImageSize: return "bad-image-size";
    case ViolationKind::NonFinite: return "non-finite";
    case ViolationKind::OutOfBounds: return "out-of-bounds";
    case ViolationKind::Degenerate: return "degenerate";
    case ViolationKind::NotClockwise: return "not-clockwise";
    case ViolationKind::Concave: return "concave";
    case ViolationKind::BadLogical: return "bad-logical";
    case ViolationKind::DuplicateLogical: return "duplicate-logical";
    case ViolationKind::OverlappingLogical: return "overlapping-logical";
  }
  return "unknown";
}

std::vector<Violation> validate_annotation(const TableAnnotation& ann,
                                           const ValidationOptions& options) {
  std::vector<Violation> report;
  auto add = [&](ViolationKind kind, int cell, int other, std::string msg) {
    report.push_back({kind, cell, other, std::move(msg)});
  };

  if (ann.image_width <= 0 || ann.image_height <= 0) {
    add(ViolationKind::BadImageSize, -1, -1,
        "image size must be positive, got " + std::to_string(ann.image_width) + "x" +
            std::to_string(ann.image_height));
  }

  const double tol = options.bounds_tolerance;
  std::vector<bool> logical_ok(ann.cells.size(), false);
  for (std::size_t i = 0; i < ann.cells.size(); ++i) {
    const int ci = static_cast<int>(i);
    const Cell& cell = ann.cells[i];
    bool finite = true;
    for (const auto& p : cell.quad.corners) finite = finite && std::isfinite(p.x) && std::isfinite(p.y);
    if (!finite) {
      add(ViolationKind::NonFinite, ci, -1, "quad has non-finite coordinates");
    } else {
      for (int k = 0; k < 4; ++k) {
        const Point2& p = cell.quad[k];
        if (p.x < -tol || p.y < -tol || p.x > ann.image_width + tol ||
            p.y > ann.image_height + tol) {
          add(ViolationKind::OutOfBounds, ci, -1,
              "corner " + std::to_string(k + 1) + " lies outside the image");
          break;
        }
      }
      const double area = signed_area(cell.quad);
      if (std::abs(area) <= 1e-9) {
        add(ViolationKind::Degenerate, ci, -1, "quad has zero area");
      } else if (area < 0.0) {
        add(ViolationKind::NotClockwise, ci, -1, "quad corners are counter-clockwise");
      } else if (!is_convex(cell.quad)) {
        add(ViolationKind::Concave, ci, -1, "quad is concave");
      }
    }

    const LogicalLoc& l = cell.logical;
    if (l.row_start < 0 || l.col_start < 0 || l.row_end < l.row_start ||
        l.col_end < l.col_start) {
      std::ostringstream os;
      os << "invalid logical location [" << l.row_start << "," << l.row_end << ","
         << l.col_start << "," << l.col_end << "]";
      add(ViolationKind::BadLogical, ci, -1, os.str());
    } else {
      logical_ok[i] = true;
    }
  }

  std::map<LogicalLoc, int> first_seen;
  for (std::size_t i = 0; i < ann.cells.size(); ++i) {
    if (!logical_ok[i]) continue;
    auto [it, inserted] = first_seen.emplace(ann.cells[i].logical, static_cast<int>(i));
    if (!inserted) {
      add(ViolationKind::DuplicateLogical, static_cast<int>(i), it->second,
          "logical location duplicates cell " + std::to_string(it->second));
    }
  }

  if (options.check_logical_overlap) {
    for (std::size_t i = 0; i < ann.cells.size(); ++i) {
      if (!logical_ok[i]) continue;
      for (std::size_t j = i + 1; j < ann.cells.size(); ++j) {
        if (!logical_ok[j]) continue;
        const auto& a = ann.cells[i].logical;
        const auto& b = ann.cells[j].logical;
        if (a == b) continue;
        if (logical_overlap(a, b)) {
          add(ViolationKind::OverlappingLogical, static_cast<int>(j), static_cast<int>(i),
              "logical rectangle overlaps cell " + std::to_string(i));
        }
      }
    }
  }
  return report;
}

std::string format_report(const std::vector<Violation>& report) {
  std::ostringstream os;
  for (const auto& v : report) {
    os << to_string(v.kind);
    if (v.cell >= 0) os << " (cell " << v.cell << ")";
    os << ": " << v.message << "\n";
  }
  return os.str();
}

}  // namespace tsrkit
