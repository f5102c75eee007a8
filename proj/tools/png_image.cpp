#include "png_image.hpp"

#include <algorithm>
#include <cmath>

#include <png.h>

#include "tsrkit/error.hpp"

namespace tsrkit::cli {

Image::Image(int w, int h, Rgb background) : width(w), height(h) {
  if (w < 1 || h < 1) throw_invalid("image must be at least 1x1");
  pixels.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < pixels.size(); i += 3) std::copy(background.begin(), background.end(), pixels.begin() + i);
}

void Image::set(int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  std::copy(c.begin(), c.end(), pixels.begin() + (static_cast<std::size_t>(y) * width + x) * 3);
}

Rgb Image::get(int x, int y) const {
  const auto* p = pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  return {p[0], p[1], p[2]};
}

namespace {

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), length);
}

void flush_nothing(png_structp) {}

}  // namespace

std::string encode_png(const Image& image) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw_internal("libpng: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw_internal("libpng: cannot create info struct");
  }
  std::string out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw_internal("libpng: encoding failed");
  }
  png_set_write_fn(png, &out, append_bytes, flush_nothing);
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y)
    png_write_row(png, const_cast<png_bytep>(image.pixels.data() + static_cast<std::size_t>(y) * image.width * 3));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

Rgb map_color(double value) {
  if (!std::isfinite(value)) return kBackground;
  const double delta = std::abs(value - std::round(value));  // 0..0.5
  if (delta <= kSaturationBand) return kSaturated;
  // t = 1 next to the band, 0 at half-integers.
  const double t = 1.0 - (delta - kSaturationBand) / (0.5 - kSaturationBand);
  const auto r = static_cast<std::uint8_t>(std::lround(40 + 170 * t));
  const auto g = static_cast<std::uint8_t>(std::lround(60 * (1.0 - t)));
  const auto b = static_cast<std::uint8_t>(std::lround(200 * (1.0 - t) + 30));
  return {r, g, b};
}

Image render_map(const RasterMap& map, const RasterMap* mask, int scale) {
  if (map.empty()) throw_invalid("viz: empty map");
  if (map.channels() != 1) throw_invalid("viz: expected a single-channel map");
  if (mask && !mask->same_shape(map)) throw_invalid("viz: mask shape differs from the map");
  scale = std::max(scale, 1);
  Image img(map.width() * scale, map.height() * scale, kBackground);
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (mask && mask->at(y, x) == 0.0) continue;
      const Rgb c = map_color(map.at(y, x));
      for (int dy = 0; dy < scale; ++dy)
        for (int dx = 0; dx < scale; ++dx) img.set(x * scale + dx, y * scale + dy, c);
    }
  }
  return img;
}

Rgb palette_color(int index) {
  // Golden-ratio hue walk; distinct for any realistic cell count and never
  // equal to white or the outline color.
  const double h = std::fmod(index * 0.618033988749895, 1.0) * 6.0;
  const double s = 0.55 + 0.35 * ((index / 7) % 2);
  const double v = 0.9 - 0.25 * ((index / 3) % 3) / 2.0;
  const int sector = static_cast<int>(h);
  const double f = h - sector;
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  double r, g, b;
  switch (sector % 6) {
    case 0: r = v, g = t, b = p; break;
    case 1: r = q, g = v, b = p; break;
    case 2: r = p, g = v, b = t; break;
    case 3: r = p, g = q, b = v; break;
    case 4: r = t, g = p, b = v; break;
    default: r = v, g = p, b = q; break;
  }
  // Fold the index into the low bits of blue so colors stay unique.
  const auto blue = static_cast<std::uint8_t>((std::lround(b * 255) & ~0x0f) | (index & 0x0f));
  return {static_cast<std::uint8_t>(std::lround(r * 255)), static_cast<std::uint8_t>(std::lround(g * 255)), blue};
}

Image render_annotation(const TableAnnotation& ann, int max_side) {
  if (ann.image_width < 1 || ann.image_height < 1) throw_invalid("viz: annotation has no image size");
  const double scale = std::min(1.0, static_cast<double>(max_side) / std::max(ann.image_width, ann.image_height));
  const int w = std::max(1, static_cast<int>(std::lround(ann.image_width * scale)));
  const int h = std::max(1, static_cast<int>(std::lround(ann.image_height * scale)));
  Image img(w, h, {255, 255, 255});
  constexpr Rgb kOutline = {0, 0, 0};

  for (std::size_t i = 0; i < ann.cells.size(); ++i) {
    Quad q = ann.cells[i].quad;
    for (int k = 0; k < 4; ++k) q[k] = q[k] * scale;
    double x0 = q[0].x, x1 = q[0].x, y0 = q[0].y, y1 = q[0].y;
    for (int k = 1; k < 4; ++k) {
      x0 = std::min(x0, q[k].x);
      x1 = std::max(x1, q[k].x);
      y0 = std::min(y0, q[k].y);
      y1 = std::max(y1, q[k].y);
    }
    const Rgb fill = palette_color(static_cast<int>(i));
    for (int y = std::max(0, static_cast<int>(std::floor(y0))); y <= std::min(h - 1, static_cast<int>(std::ceil(y1))); ++y) {
      for (int x = std::max(0, static_cast<int>(std::floor(x0))); x <= std::min(w - 1, static_cast<int>(std::ceil(x1))); ++x) {
        const Point2 p{x + 0.5, y + 0.5};
        bool inside = true;
        for (int k = 0; k < 4 && inside; ++k) {
          const Point2 a = q[k], b = q[(k + 1) % 4];
          // Clockwise in image coordinates: interior is on the right.
          inside = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= 0.0;
        }
        if (inside) img.set(x, y, fill);
      }
    }
  }
  // Outlines last so neighbors cannot paint over them.
  for (const auto& cell : ann.cells) {
    for (int k = 0; k < 4; ++k) {
      const Point2 a = cell.quad[k] * scale, b = cell.quad[(k + 1) % 4] * scale;
      const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(b.x - a.x), std::abs(b.y - a.y)))));
      for (int s = 0; s <= steps; ++s) {
        const double t = static_cast<double>(s) / steps;
        img.set(static_cast<int>(std::floor(a.x + t * (b.x - a.x))), static_cast<int>(std::floor(a.y + t * (b.y - a.y))),
                kOutline);
      }
    }
  }
  return img;
}

}  // namespace tsrkit::cli
