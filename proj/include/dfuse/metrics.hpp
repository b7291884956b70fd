#pragma once

#include <string>

#include "dfuse/core.hpp"

namespace dfuse {

struct EvalResult {
  std::string metric;
  double value = 0.0;
  double value_squared = 0.0;  // reported alongside for sc-inv comparability
  int pixel_count = 0;
  std::string mask_description;
};

// Standard deviation of the masked log-depth residual z = pred - gt:
//   sqrt( mean(z^2) - mean(z)^2 ).
// Invariant under a global shift of pred (a global depth scale factor).
double scale_invariant_error(const ImageGrid& pred_log, const ImageGrid& gt_log,
                             const ValidityMask& mask);

// Root mean squared depth difference in meters over the masked pixels.
double rmse_depth(const ImageGrid& pred_depth, const ImageGrid& gt_depth,
                  const ValidityMask& mask);

// Mean squared difference of two confidence maps over the masked pixels;
// both inputs must lie in [0,1] there.
double confidence_loss(const ImageGrid& predicted, const ImageGrid& target,
                       const ValidityMask& mask);

}  // namespace dfuse
