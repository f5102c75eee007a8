#pragma once

namespace tsrkit {

struct LossConfig {
  double lambda_u = 1.0;
  double lambda_v = 0.5;
  double lambda_e = 0.2;
  double focal_alpha = 2.0;
  double focal_beta = 4.0;
  double span_cap = 0.2;
  int downscale = 4;
};

/// Throws TsrError(InvalidInput) if any weight is non-positive or downscale < 1.
void check_loss_config(const LossConfig& cfg);

}  // namespace tsrkit
