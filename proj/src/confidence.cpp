#include "dfuse/confidence.hpp"

#include <cmath>
#include <iostream>

#include "dfuse/densify.hpp"

namespace dfuse {

void ConfidenceParams::validate() const {
  if (!(lambda > 0)) throw RangeError("lambda must be positive");
  if (alpha_s < 0 || beta_s < 0 || gamma_s < 0) {
    throw RangeError("error weights must be non-negative");
  }
  if (!(alpha_s + beta_s + gamma_s > 0)) {
    throw RangeError("at least one error weight must be positive");
  }
}

ImageGrid pointwise_error(const ImageGrid& y_input, const ImageGrid& y_gt,
                          const ValidityMask& coverage,
                          const ConfidenceParams& params) {
  params.validate();
  if (!y_input.same_shape(y_gt) || !coverage.same_shape(y_input)) {
    throw ShapeError("pointwise_error dimension mismatch");
  }
  const int w = y_input.width, h = y_input.height;

  double residual_sum = 0.0;
  int n = 0;
  for (int i = 0; i < y_input.size(); ++i) {
    if (!coverage.is_valid(i)) continue;
    residual_sum += y_input[i] - y_gt[i];
    ++n;
  }
  if (n == 0) throw EmptyCoverage("pointwise_error over empty coverage");
  const double mean_term = params.beta_s * residual_sum / n;

  ImageGrid out(w, h, 0.0);
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const int i = py * w + px;
      if (!coverage.is_valid(i)) continue;
      double e = (params.alpha_s + params.beta_s) * (y_input[i] - y_gt[i]) -
                 mean_term;
      if (params.gamma_s != 0.0) {
        const int nbrs[4] = {px > 0 ? i - 1 : -1, px + 1 < w ? i + 1 : -1,
                             py > 0 ? i - w : -1, py + 1 < h ? i + w : -1};
        double pair_sum = 0.0;
        for (int k : nbrs) {
          if (k < 0 || !coverage.is_valid(k)) continue;
          pair_sum += (y_input[k] - y_input[i]) - (y_gt[k] - y_gt[i]);
        }
        e += params.gamma_s * pair_sum;
      }
      out[i] = e;
    }
  }
  return out;
}

ImageGrid confidence_target(const ImageGrid& errors, double lambda) {
  if (!(lambda > 0)) throw RangeError("lambda must be positive");
  ImageGrid out(errors.width, errors.height);
  for (int i = 0; i < errors.size(); ++i) {
    out[i] = std::exp(-lambda * std::abs(errors[i]));
  }
  return out;
}

ImageGrid oracle_sparse_confidence(const SparseDepthMap& sparse,
                                   const ImageGrid& y_gt,
                                   const ConfidenceParams& params) {
  params.validate();
  if (!sparse.log_depth.same_shape(y_gt)) {
    throw ShapeError("sparse/ground-truth dimension mismatch");
  }
  Triangulation tri;
  try {
    tri = triangulate(sparse);
  } catch (const TooFewPoints& e) {
    std::cerr << "oracle_sparse_confidence: " << e.what()
              << "; returning zero confidence\n";
    return ImageGrid(y_gt.width, y_gt.height, 0.0);
  }
  auto [densified, coverage] = interpolate(tri, sparse);

  double gt_mean = 0.0;
  for (int i = 0; i < y_gt.size(); ++i) gt_mean += y_gt[i];
  gt_mean /= y_gt.size();

  const ImageGrid normalized = normalize_scale(densified, coverage, gt_mean);
  const ImageGrid errors = pointwise_error(normalized, y_gt, coverage, params);
  ImageGrid conf = confidence_target(errors, params.lambda);
  for (int i = 0; i < conf.size(); ++i) {
    if (!sparse.mask.is_valid(i)) conf[i] = 0.0;
  }
  return conf;
}

ImageGrid oracle_dense_confidence(const ImageGrid& y_pred,
                                  const ImageGrid& y_gt,
                                  const ConfidenceParams& params) {
  const ValidityMask all(y_pred.width, y_pred.height, true);
  return confidence_target(pointwise_error(y_pred, y_gt, all, params),
                           params.lambda);
}

ImageGrid constant_confidence(int width, int height, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw RangeError("constant confidence must lie in [0,1]");
  }
  return ImageGrid(width, height, value);
}

}  // namespace dfuse
