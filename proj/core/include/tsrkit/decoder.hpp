#pragma once

#include <array>
#include <string>
#include <vector>

#include "tsrkit/geometry.hpp"
#include "tsrkit/network_output.hpp"
#include "tsrkit/raster.hpp"

namespace tsrkit {

enum class KeypointKindTag { Center, Corner };

struct Keypoint {
  Point2 position;  // lowres, offset-refined
  int pixel_y = 0;
  int pixel_x = 0;
  double score = 0.0;
  KeypointKindTag kind = KeypointKindTag::Center;
};

struct DecodeConfig {
  double tau_center = 0.3;
  double tau_corner = 0.3;
  int max_k = 3000;
  double align_radius = 2.0;   // lowres px
  double back_epsilon = 2.0;   // lowres px
  // Logical lookups read the maps this far (lowres px) inside the cell from
  // its upper-left corner, along the top and left edges. 0 samples the
  // corner itself.
  double sample_inset = 1.0;
};

/// Local maxima of one heatmap channel: value >= tau, >= all 8 neighbors and
/// > every neighbor that precedes it in row-major order (a plateau yields its
/// row-major-first pixel). Highest max_k by score, ties in row-major order.
std::vector<Keypoint> extract_peaks(const RasterMap& heatmap, int channel, const RasterMap& offsets,
                                    double tau, int max_k);

enum CellFlag : unsigned {
  kFlagDegenerate = 1u << 0,
  kFlagRowStartClamped = 1u << 1,
  kFlagColStartClamped = 1u << 2,
  kFlagRowSpanClamped = 1u << 3,
  kFlagColSpanClamped = 1u << 4,
  kFlagLookupClamped = 1u << 5,
  kFlagCoordinateClamped = 1u << 6,
};

struct ApproxCell {
  Point2 center;  // lowres
  int pixel_y = 0;
  int pixel_x = 0;
  Quad quad;  // lowres
  double row_span = 1.0;
  double col_span = 1.0;
  double score = 0.0;
  std::array<bool, 4> snapped{};
  unsigned flags = 0;
};

/// Corners from center + center-to-corner vectors read at the center pixel.
std::vector<ApproxCell> regress_cells(const std::vector<Keypoint>& centers, const RasterMap& center2corners,
                                      const RasterMap& spans);

/// Snaps each regressed corner to the nearest corner keypoint within
/// align_radius that has a corner-to-center slot pointing back to within
/// back_epsilon of the cell center.
void align_corners(std::vector<ApproxCell>& cells, const std::vector<Keypoint>& corners,
                   const RasterMap& corners2center, const DecodeConfig& cfg);

/// Logical indices from the interpolation maps and the span head:
/// rs = round(I_r), re = rs + floor(s_r) - 1, and likewise for columns.
LogicalLoc assign_logical(const ApproxCell& cell, const RasterMap& row_map, const RasterMap& col_map,
                          const DecodeConfig& cfg, unsigned* flags = nullptr);

struct CellDiagnostics {
  int aligned_corners = 0;
  unsigned flags = 0;
};

struct DecodedTable {
  TableAnnotation annotation;
  std::vector<double> scores;
  std::vector<CellDiagnostics> diagnostics;
  std::vector<std::pair<int, int>> logical_conflicts;  // overlapping or duplicate pairs
};

DecodedTable decode_table(const RawNetworkOutput& raw, const DecodeConfig& cfg = {});

std::string diagnostics_to_json(const DecodedTable& table);

}  // namespace tsrkit
