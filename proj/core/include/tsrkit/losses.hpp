#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tsrkit/geometry.hpp"
#include "tsrkit/loss_config.hpp"
#include "tsrkit/network_output.hpp"
#include "tsrkit/targets.hpp"

namespace tsrkit {

// All losses read predictions at the ground-truth keypoint pixels. When a
// gradient container is passed, d(loss)/d(pred) is *added* into it; the
// container must have the prediction's layout (see make_zero_output).
//
// The quality weights (omega for the spatial loss, d_r / d_c for the span
// loss) and the corner slot assignment are stop-gradient constants. Each
// loss reports the weights it used; passing them back through `frozen`
// evaluates the same surrogate with those weights held fixed, which is what
// a finite-difference check of the analytic gradient must differentiate.

/// sin(pi/2 * min((|u - u_hat| + |v - v_hat|) / |u|, 1)); 1 with a warning
/// flag when |u| == 0.
double pairing_weight(double u_norm, double residual_u, double residual_v, bool* degenerate = nullptr);

/// Mean absolute invalid-slot magnitude: sum(|x| + |y|) / (8m - 8n), or 0
/// when m <= n.
double invalid_slot_loss(const std::vector<Point2>& invalid_vectors, int corner_count, int cell_count);

struct SpatialWeights {
  std::vector<double> omega;                          // per cell
  std::vector<std::array<int, 4>> slot_assignment;    // per corner entry: GT slot -> pred slot
};

struct SpatialLoss {
  double value = 0.0;
  double pair_term = 0.0;
  double invalid_term = 0.0;  // L_e before lambda_e
  SpatialWeights weights;
  std::vector<std::string> warnings;
};

/// Assignment of GT slots to predicted slots at one corner, minimizing the
/// summed L1 error over the valid GT slots. Ties keep the lexicographically
/// first permutation.
std::array<int, 4> match_corner_slots(const CornerTarget& gt, const std::array<Point2, 4>& pred);

SpatialLoss spatial_loss(const RawNetworkOutput& pred, const TargetBundle& target, const LossConfig& cfg,
                         RawNetworkOutput* grad = nullptr, const SpatialWeights* frozen = nullptr);

/// f(I) = (1 - |I - round(I)|)^2.
double boundary_weight(double value);

struct BoundaryLoss {
  double value = 0.0;
  bool empty_mask = false;
};

BoundaryLoss boundary_loss(const RasterMap& pred_row, const RasterMap& pred_col, const RasterMap& gt_row,
                           const RasterMap& gt_col, const RasterMap& mask, RasterMap* grad_row = nullptr,
                           RasterMap* grad_col = nullptr);

/// Two edge-wise span estimates read from the interpolation maps at the
/// nearest pixels of a cell's four (lowres) corners.
struct SpanEstimate {
  std::array<double, 2> row{};  // (I_r[p4] - I_r[p1], I_r[p3] - I_r[p2])
  std::array<double, 2> col{};  // (I_c[p2] - I_c[p1], I_c[p3] - I_c[p4])
  std::array<PixelIndex, 4> pixels{};
};

/// Nearest pixel to a lowres position, clamped into the raster.
PixelIndex nearest_pixel(Point2 p, int height, int width);

SpanEstimate span_from_maps(const std::array<Point2, 4>& corners, const RasterMap& row_map,
                            const RasterMap& col_map);

/// sin(pi / (2 cap) * min(|s_hat - s| + mean_k |s_tilde_k - s|, cap)).
/// With cap = 0.2 this is sin(5 pi / 2 * min(..., 0.2)).
double span_weight(double predicted, double target, const std::array<double, 2>& from_maps, double cap = 0.2);

struct SpanWeights {
  std::vector<double> d_row;
  std::vector<double> d_col;
};

struct SpanLoss {
  double value = 0.0;
  SpanWeights weights;
};

SpanLoss span_loss(const RawNetworkOutput& pred, const TargetBundle& target, const LossConfig& cfg,
                   RawNetworkOutput* grad = nullptr, const SpanWeights* frozen = nullptr);

inline constexpr double kHeatmapClamp = 1e-6;

struct KeypointLoss {
  double heatmap = 0.0;  // focal term
  double offset = 0.0;
  int positives = 0;

  double value() const { return heatmap + offset; }
};

KeypointLoss keypoint_loss(const RawNetworkOutput& pred, const TargetBundle& target, const LossConfig& cfg,
                           RawNetworkOutput* grad = nullptr);

struct LossBreakdown {
  double keypoint = 0.0;
  double offset = 0.0;
  double spatial = 0.0;
  double boundary = 0.0;
  double span = 0.0;
  double logical = 0.0;
  double overall = 0.0;
};

struct OverallLoss {
  LossBreakdown breakdown;
  std::optional<RawNetworkOutput> gradient;
  std::vector<std::string> warnings;
};

OverallLoss overall_loss(const RawNetworkOutput& pred, const TargetBundle& target, const LossConfig& cfg,
                         bool with_gradient = true);

/// Flat JSON object of the named components.
std::string breakdown_to_json(const LossBreakdown& breakdown);

}  // namespace tsrkit
