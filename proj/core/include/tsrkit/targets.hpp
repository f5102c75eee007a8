#pragma once

#include <array>
#include <string>
#include <vector>

#include "tsrkit/geometry.hpp"
#include "tsrkit/loss_config.hpp"
#include "tsrkit/network_output.hpp"
#include "tsrkit/raster.hpp"

namespace tsrkit {

/// Lowres pixel coordinate.
struct PixelIndex {
  int y = 0;
  int x = 0;

  friend auto operator<=>(const PixelIndex&, const PixelIndex&) = default;
};

enum class KeypointKind { Center, Corner };

struct OffsetTarget {
  PixelIndex pixel;
  KeypointKind kind = KeypointKind::Center;
  double dx = 0.0;
  double dy = 0.0;
};

/// Center-to-corner displacements (lowres units) for one cell.
struct CenterTarget {
  int cell = -1;
  PixelIndex pixel;
  Point2 center;            // lowres
  std::array<double, 8> u{};  // (dx, dy) for corners 1..4
};

struct CornerSlot {
  double dx = 0.0;
  double dy = 0.0;
  bool valid = false;
  int cell = -1;
};

/// Corner-to-center displacements of every cell sharing one corner pixel.
/// Valid slots come first, ordered by the owning cell's (row_start, col_start).
struct CornerTarget {
  PixelIndex pixel;
  Point2 position;  // lowres
  std::array<CornerSlot, 4> slots{};

  int valid_count() const;
};

struct SpanTarget {
  int cell = -1;
  PixelIndex pixel;
  double row_span = 1.0;
  double col_span = 1.0;
};

/// Per-cell cross references into the sparse target lists.
struct CellLink {
  int center_entry = -1;                  // index into center2corners / spans
  std::array<int, 4> corner_entry{};      // index into corners2center
  std::array<int, 4> corner_slot{};       // slot within that entry, -1 if dropped
  std::array<Point2, 4> corners{};        // lowres corner positions of the cell
};

struct TargetBundle {
  RasterMap heatmap;  // 2 ch
  std::vector<OffsetTarget> offsets;
  std::vector<CenterTarget> center2corners;
  std::vector<CornerTarget> corners2center;
  std::vector<SpanTarget> spans;
  std::vector<CellLink> links;
  RasterMap row_map;
  RasterMap col_map;
  RasterMap mask;
  OutputMeta meta;
  std::vector<std::string> warnings;
};

/// CenterNet radius for a box of the given size (min overlap 0.7).
double gaussian_radius(double height, double width, double min_overlap = 0.7);

/// Two-channel lowres heatmap with unit Gaussian peaks at every cell center
/// and every distinct corner pixel.
RasterMap splat_keypoints(const TableAnnotation& ann, const LossConfig& cfg,
                          std::vector<std::string>* warnings = nullptr);

std::vector<OffsetTarget> make_offsets(const TableAnnotation& ann, const LossConfig& cfg);

struct VectorTargets {
  std::vector<CenterTarget> center2corners;
  std::vector<CornerTarget> corners2center;
  std::vector<CellLink> links;
  std::vector<std::string> warnings;
};

VectorTargets make_vector_targets(const TableAnnotation& ann, const LossConfig& cfg);

std::vector<SpanTarget> make_span_targets(const TableAnnotation& ann, const LossConfig& cfg);

TargetBundle assemble_target_bundle(const TableAnnotation& ann, const LossConfig& cfg);

/// Dense RawNetworkOutput carrying the targets at their pixels (zeros
/// elsewhere). This is what a perfect network would emit.
RawNetworkOutput targets_as_output(const TargetBundle& bundle);

}  // namespace tsrkit
