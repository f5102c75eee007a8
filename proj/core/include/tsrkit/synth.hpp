#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "tsrkit/geometry.hpp"
#include "tsrkit/loss_config.hpp"
#include "tsrkit/network_output.hpp"

namespace tsrkit {

/// xorshift64* generator seeded through splitmix64. Small, documented and
/// easy to reproduce in other languages.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi], unbiased.
  int uniform_int(int lo, int hi);
  bool bernoulli(double p) { return uniform() < p; }
  /// Independent child stream; advances this generator by one step.
  Rng split();

 private:
  std::uint64_t state_;
};

std::uint64_t splitmix64(std::uint64_t x);

enum class WarpKind { None, Affine, Homography };

const char* to_string(WarpKind kind);
WarpKind parse_warp_kind(const std::string& s);

struct IntRange {
  int lo = 1;
  int hi = 1;
};

struct SynthConfig {
  IntRange rows{1, 12};
  IntRange cols{1, 10};
  double merge_probability = 0.2;
  int max_merge_span = 3;
  WarpKind warp = WarpKind::None;
  double warp_magnitude = 0.05;  // max corner displacement, fraction of the image diagonal
  int height = 1024;
  int width = 1024;
  std::uint64_t seed = 0;
  // Grid lines of unwarped tables land on multiples of this (px) when every
  // row and column stays at least min_cell_size. 0 disables snapping.
  int lattice = 4;
  double size_jitter = 0.5;  // row/column weights drawn from [1, 1 + size_jitter]
  double min_cell_size = 8.0;
};

void check_synth_config(const SynthConfig& cfg);

/// Row-major 3x3 matrix acting on (x, y, 1).
using Homography = std::array<double, 9>;

inline constexpr Homography kIdentityHomography = {1, 0, 0, 0, 1, 0, 0, 0, 1};

/// Exact 4-point homography mapping src[k] to dst[k].
Homography homography_from_points(const std::array<Point2, 4>& src, const std::array<Point2, 4>& dst);

Point2 apply_homography(const Homography& h, Point2 p);

/// Maps every corner; logical locations are untouched. Throws InvalidInput
/// when a corner leaves the image or the transform folds a cell.
TableAnnotation warp_annotation(const TableAnnotation& ann, const Homography& h);

/// Deterministic random table; the result always passes validate_annotation.
TableAnnotation gen_table(const SynthConfig& cfg);

/// The config the round-trip harness uses for a seed: every fourth seed is
/// homography-warped, the next one affine-warped, the rest unwarped.
SynthConfig harness_config(std::uint64_t seed, int height = 1024, int width = 1024);

/// Ground-truth targets laid out as a perfect network output.
RawNetworkOutput render_oracle(const TableAnnotation& ann, const LossConfig& cfg = {});

}  // namespace tsrkit
