#include "dfuse/metrics.hpp"

#include <cmath>

namespace dfuse {

namespace {

void require_shapes(const ImageGrid& a, const ImageGrid& b,
                    const ValidityMask& m) {
  if (!a.same_shape(b) || !m.same_shape(a)) {
    throw ShapeError("metric input dimension mismatch");
  }
  if (m.count() == 0) throw EmptyMask("metric over empty mask");
}

}  // namespace

double scale_invariant_error(const ImageGrid& pred_log, const ImageGrid& gt_log,
                             const ValidityMask& mask) {
  require_shapes(pred_log, gt_log, mask);
  // two-pass centered form of sqrt(mean z^2 - mean(z)^2): algebraically
  // identical, but immune to cancellation when the residual is near-constant
  double sum = 0.0;
  int n = 0;
  for (int i = 0; i < pred_log.size(); ++i) {
    if (!mask.is_valid(i)) continue;
    sum += pred_log[i] - gt_log[i];
    ++n;
  }
  const double mean = sum / n;
  double var = 0.0;
  for (int i = 0; i < pred_log.size(); ++i) {
    if (!mask.is_valid(i)) continue;
    const double z = pred_log[i] - gt_log[i] - mean;
    var += z * z;
  }
  return std::sqrt(var / n);
}

double rmse_depth(const ImageGrid& pred_depth, const ImageGrid& gt_depth,
                  const ValidityMask& mask) {
  require_shapes(pred_depth, gt_depth, mask);
  double sum_sq = 0.0;
  int n = 0;
  for (int i = 0; i < pred_depth.size(); ++i) {
    if (!mask.is_valid(i)) continue;
    const double d = pred_depth[i] - gt_depth[i];
    sum_sq += d * d;
    ++n;
  }
  return std::sqrt(sum_sq / n);
}

double confidence_loss(const ImageGrid& predicted, const ImageGrid& target,
                       const ValidityMask& mask) {
  require_shapes(predicted, target, mask);
  double sum_sq = 0.0;
  int n = 0;
  for (int i = 0; i < predicted.size(); ++i) {
    if (!mask.is_valid(i)) continue;
    if (!(predicted[i] >= 0.0 && predicted[i] <= 1.0) ||
        !(target[i] >= 0.0 && target[i] <= 1.0)) {
      throw RangeError("confidence outside [0,1] under the mask");
    }
    const double d = predicted[i] - target[i];
    sum_sq += d * d;
    ++n;
  }
  return sum_sq / n;
}

}  // namespace dfuse
