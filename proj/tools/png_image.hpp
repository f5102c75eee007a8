#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tsrkit/geometry.hpp"
#include "tsrkit/raster.hpp"

namespace tsrkit::cli {

using Rgb = std::array<std::uint8_t, 3>;

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // RGB, row-major

  Image(int w, int h, Rgb background);
  void set(int x, int y, Rgb c);
  Rgb get(int x, int y) const;
};

/// 8-bit RGB PNG bytes.
std::string encode_png(const Image& image);

/// Map colors: distance to the nearest integer drives the hue, from blue
/// (half-integer) to red (integer). Values within kSaturationBand of an
/// integer are pure red. Pixels with mask 0 get the background color.
inline constexpr double kSaturationBand = 0.05;
inline constexpr Rgb kBackground = {24, 24, 24};
inline constexpr Rgb kSaturated = {255, 0, 0};

Rgb map_color(double value);
Image render_map(const RasterMap& map, const RasterMap* mask, int scale);

/// Filled polygons, one distinct color per cell, with dark outlines.
Image render_annotation(const TableAnnotation& ann, int max_side);

Rgb palette_color(int index);

}  // namespace tsrkit::cli
