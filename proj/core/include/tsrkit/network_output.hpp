#pragma once

#include "tsrkit/raster.hpp"

namespace tsrkit {

/// Full-resolution image size and the stride of the output heads.
struct OutputMeta {
  int height = 0;
  int width = 0;
  int downscale = 4;

  int lowres_height() const { return (height + downscale - 1) / downscale; }
  int lowres_width() const { return (width + downscale - 1) / downscale; }

  friend bool operator==(const OutputMeta&, const OutputMeta&) = default;
};

/// Dense head outputs at lowres resolution. Also used as the gradient
/// container for the losses, with identical layout.
struct RawNetworkOutput {
  RasterMap heatmap;         // 2 ch: center, corner
  RasterMap offsets;         // 2 ch: dx, dy
  RasterMap center2corners;  // 8 ch: (dx, dy) to corners 1..4
  RasterMap corners2center;  // 8 ch: 4 slots x (dx, dy)
  RasterMap spans;           // 2 ch: row span, col span
  RasterMap row_map;         // 1 ch
  RasterMap col_map;         // 1 ch
  OutputMeta meta;

  friend bool operator==(const RawNetworkOutput&, const RawNetworkOutput&) = default;
};

inline constexpr int kCenterChannel = 0;
inline constexpr int kCornerChannel = 1;

/// All-zero output with the lowres shape implied by meta.
RawNetworkOutput make_zero_output(const OutputMeta& meta);

/// Throws TsrError(InvalidInput) unless every raster has the lowres size and
/// its expected channel count.
void check_output_shape(const RawNetworkOutput& raw);

}  // namespace tsrkit
