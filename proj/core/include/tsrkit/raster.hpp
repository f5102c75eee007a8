#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace tsrkit {

/// Dense H x W x C grid of reals, row-major with the channel index fastest.
class RasterMap {
 public:
  RasterMap() = default;
  RasterMap(int height, int width, int channels = 1, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  bool contains(int y, int x) const { return y >= 0 && x >= 0 && y < height_ && x < width_; }

  std::size_t index(int y, int x, int c = 0) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }
  double& at(int y, int x, int c = 0) { return data_[index(y, x, c)]; }
  double at(int y, int x, int c = 0) const { return data_[index(y, x, c)]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  void fill(double value);
  bool same_shape(const RasterMap& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  /// Copies one channel out into a single-channel map.
  RasterMap channel(int c) const;

  friend bool operator==(const RasterMap&, const RasterMap&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// TCN1 raster format: "TCN1", u32 LE height, width, channels, then
// height*width*channels f32 LE values (row-major, channel-minor).
void write_tcn(std::ostream& out, const RasterMap& map);
RasterMap read_tcn(std::istream& in);

void save_tcn(const std::filesystem::path& path, const RasterMap& map);
RasterMap load_tcn(const std::filesystem::path& path);

}  // namespace tsrkit
