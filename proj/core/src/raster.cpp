#include "tsrkit/raster.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "tsrkit/error.hpp"
#include "tsrkit/tensor_io.hpp"

namespace tsrkit {

namespace {

constexpr std::array<char, 4> kMagic = {'T', 'C', 'N', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> bytes = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                     static_cast<char>((v >> 16) & 0xff),
                                     static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes.data(), 4);
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  if (!in) throw_invalid("TCN1: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

RasterMap::RasterMap(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 0 || width < 0 || channels < 0) throw_invalid("RasterMap: negative dimension");
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

void RasterMap::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

RasterMap RasterMap::channel(int c) const {
  RasterMap out(height_, width_, 1);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) out.at(y, x) = at(y, x, c);
  return out;
}

void write_tcn(std::ostream& out, const RasterMap& map) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, static_cast<std::uint32_t>(map.height()));
  put_u32(out, static_cast<std::uint32_t>(map.width()));
  put_u32(out, static_cast<std::uint32_t>(map.channels()));
  std::vector<char> buffer(map.data().size() * 4);
  for (std::size_t i = 0; i < map.data().size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(map.data()[i]));
    buffer[4 * i + 0] = static_cast<char>(bits & 0xff);
    buffer[4 * i + 1] = static_cast<char>((bits >> 8) & 0xff);
    buffer[4 * i + 2] = static_cast<char>((bits >> 16) & 0xff);
    buffer[4 * i + 3] = static_cast<char>((bits >> 24) & 0xff);
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
}

RasterMap read_tcn(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kMagic) throw_invalid("TCN1: bad magic bytes");
  const std::uint32_t h = get_u32(in);
  const std::uint32_t w = get_u32(in);
  const std::uint32_t c = get_u32(in);
  constexpr std::uint64_t kMaxValues = 1ull << 32;
  const std::uint64_t count = static_cast<std::uint64_t>(h) * w * c;
  if (h > (1u << 20) || w > (1u << 20) || c > 4096 || count > kMaxValues)
    throw_invalid("TCN1: implausible dimensions");
  RasterMap map(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
  std::vector<unsigned char> buffer(count * 4);
  in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
  if (static_cast<std::uint64_t>(in.gcount()) != count * 4) throw_invalid("TCN1: truncated payload");
  auto data = map.data();
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t bits = static_cast<std::uint32_t>(buffer[4 * i]) |
                               (static_cast<std::uint32_t>(buffer[4 * i + 1]) << 8) |
                               (static_cast<std::uint32_t>(buffer[4 * i + 2]) << 16) |
                               (static_cast<std::uint32_t>(buffer[4 * i + 3]) << 24);
    data[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return map;
}

void save_tcn(const std::filesystem::path& path, const RasterMap& map) {
  std::ostringstream os(std::ios::binary);
  write_tcn(os, map);
  write_file_atomic(path, os.str());
}

RasterMap load_tcn(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_invalid("cannot open raster " + path.string());
  try {
    return read_tcn(in);
  } catch (const TsrError& e) {
    throw TsrError(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace tsrkit
