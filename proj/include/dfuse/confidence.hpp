#pragma once

#include "dfuse/core.hpp"

namespace dfuse {

// Weights of the per-pixel scale-invariant error used to build confidence
// targets: lambda is the exponential contrast, the *_s weights select how
// scale-invariant the error is (alpha_s = 0 gives full invariance under a
// global log shift).
struct ConfidenceParams {
  double lambda = 2.0;
  double alpha_s = 0.0;
  double beta_s = 1.0;
  double gamma_s = 1.0;

  void validate() const;

  // Defaults for sparse maps of unknown scale (fully scale-invariant).
  static ConfidenceParams sparse_defaults() { return {2.0, 0.0, 1.0, 1.0}; }
  // Defaults for metric dense predictions (absolute error matters).
  static ConfidenceParams dense_defaults() { return {2.0, 1.0, 0.0, 1.0}; }
};

// Signed per-pixel error of y_input against y_gt over the covered pixels:
//   E_i = (alpha_s + beta_s)(in_i - gt_i)
//       - (beta_s / N) sum_j (in_j - gt_j)
//       + gamma_s sum_{k in N4(i)} ((in_k - in_i) - (gt_k - gt_i))
// with N the covered-pixel count and both sums restricted to covered
// pixels. Uncovered pixels get 0.
ImageGrid pointwise_error(const ImageGrid& y_input, const ImageGrid& y_gt,
                          const ValidityMask& coverage,
                          const ConfidenceParams& params);

// c_i = exp(-lambda |E_i|), in (0, 1].
ImageGrid confidence_target(const ImageGrid& errors, double lambda);

// Ground-truth confidence targets for a sparse map: densify by Delaunay
// interpolation, shift to the ground-truth mean log depth, score against
// the ground truth, exponentiate, and mask to the valid sparse pixels.
// An untriangulatable map yields all-zero confidence with a warning.
ImageGrid oracle_sparse_confidence(const SparseDepthMap& sparse,
                                   const ImageGrid& y_gt,
                                   const ConfidenceParams& params);

// Ground-truth confidence targets for a dense prediction (full coverage).
ImageGrid oracle_dense_confidence(const ImageGrid& y_pred,
                                  const ImageGrid& y_gt,
                                  const ConfidenceParams& params);

// Uniform confidence map; value must lie in [0,1].
ImageGrid constant_confidence(int width, int height, double value);

}  // namespace dfuse
