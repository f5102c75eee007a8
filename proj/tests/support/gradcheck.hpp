#pragma once

// Central finite-difference check of analytic loss gradients.

#include <functional>
#include <vector>

#include "tsrkit/network_output.hpp"
#include "tsrkit/synth.hpp"

namespace oracle {

using RasterField = tsrkit::RasterMap tsrkit::RawNetworkOutput::*;

struct Coordinate {
  RasterField field;
  std::size_t index;
};

struct GradCheck {
  double relative_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||)
  int checked = 0;
  int skipped_near_kink = 0;
};

using LossFn = std::function<double(const tsrkit::RawNetworkOutput&)>;

/// Compares `analytic` with central differences of `loss` at `point` over the
/// given coordinates. A coordinate whose one-sided slopes over `kink_radius`
/// disagree sits near a non-smooth locus and is skipped.
GradCheck check_gradient(const LossFn& loss, const tsrkit::RawNetworkOutput& point,
                         const tsrkit::RawNetworkOutput& analytic, const std::vector<Coordinate>& coords,
                         double step = 1e-5, double kink_radius = 1e-3);

/// Every coordinate of the listed fields.
std::vector<Coordinate> all_coordinates(const tsrkit::RawNetworkOutput& raw, const std::vector<RasterField>& fields);

/// Coordinates with a nonzero analytic gradient, plus up to `extra` zero ones.
std::vector<Coordinate> active_coordinates(const tsrkit::RawNetworkOutput& grad,
                                           const std::vector<RasterField>& fields, tsrkit::Rng& rng,
                                           int extra = 16);

/// Oracle output with every regression value moved by a random amount in
/// [0.02, 0.2] of either sign and every heatmap value drawn from [0.05, 0.95].
tsrkit::RawNetworkOutput perturbed(const tsrkit::RawNetworkOutput& exact, tsrkit::Rng& rng);

}  // namespace oracle
