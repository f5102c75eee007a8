#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "tsrkit/geometry.hpp"
#include "tsrkit/raster.hpp"

namespace tsrkit {

struct InterpVertex {
  double x = 0.0;
  double y = 0.0;
  double o = 0.0;  // logical value carried by the vertex
};

/// A cell quad whose corners carry logical values to be interpolated.
struct InterpPolygon {
  std::array<InterpVertex, 4> vertices{};
};

/// Interpolated raster plus coverage mask, both H x W single-channel.
struct InterpResult {
  RasterMap interp;
  RasterMap mask;
  std::vector<std::string> warnings;
};

/// Row polygons: top corners carry row_start, bottom corners row_end + 1.
std::vector<InterpPolygon> build_row_polygons(const TableAnnotation& ann);

/// Column polygons: left corners carry col_start, right corners col_end + 1.
std::vector<InterpPolygon> build_col_polygons(const TableAnnotation& ann);

/// Triangle split of a quad into two triangles, as vertex-index triples.
using QuadSplit = std::array<std::array<int, 3>, 2>;

/// Delaunay split of four points. The 1-3 diagonal (indices 0,2) is kept
/// unless vertex 4 lies strictly inside the circumcircle of vertices 1,2,3;
/// co-circular ties keep the 1-3 diagonal.
QuadSplit delaunay_quad_split(const std::array<Point2, 4>& pts);

/// Barycentric tolerance for the point-in-triangle test.
inline constexpr double kBarycentricTolerance = -1e-9;

/// Rasterizes polygons in ascending area order. Each grid point covered by
/// the polygon's triangulation gets the barycentric interpolation of the
/// vertex values; a pixel is written only once (the smallest polygon wins).
InterpResult interpolate_polygons(std::span<const InterpPolygon> polygons, int height, int width);

struct InterpMaps {
  InterpResult rows;
  InterpResult cols;
};

/// Full-resolution row and column maps sized (image_height, image_width).
/// Throws TsrError(Internal) if the two masks differ.
InterpMaps generate_interp_maps(const TableAnnotation& ann);

/// Stride sampling: output (j, i) takes input (j * factor, i * factor).
RasterMap downsample_map(const RasterMap& map, int factor);

}  // namespace tsrkit
