#pragma once

#include <Eigen/Core>

#include "dfuse/core.hpp"

namespace dfuse {

// Component values of the fused energy
//   E = alpha*E_u + beta*E_fc + gamma*E_lc
// with E_u the confidence-weighted unary anchor to the sparse map and
// E_fc/E_lc the fully-connected and 4-neighborhood pairwise terms that
// penalize log depth-ratio disagreement with the dense prior.
struct EnergyBreakdown {
  double unary = 0.0;
  double fully_connected = 0.0;
  double local = 0.0;
  double total = 0.0;
};

// Largest pixel count accepted by the dense O(N^2) oracle paths.
inline constexpr int kDenseOracleMaxPixels = 4096;

// Returns a copy of `dense` with epsilon added to every confidence value
// (clamped to <= 1 + epsilon). This is the confidence view the solver and
// the dense system share; energy/matrix routines use confidences as given.
DensePrediction with_epsilon(const DensePrediction& dense, double epsilon);

// Sum_i c_i^s (y_i - y_i^s)^2 over valid sparse pixels.
double eval_unary(const ImageGrid& y, const SparseDepthMap& sparse);

// All-pairs term, direct O(N^2) form:
//   (1/2N) Sum_{i,j} c_i c_j ((y_j - y_i) - (y_j^d - y_i^d))^2.
// Oracle path; throws SizeError above kDenseOracleMaxPixels.
double eval_fc_naive(const ImageGrid& y, const DensePrediction& dense);

// Same quantity in the factorized O(N) form:
//   (1/N) (Sum_j c_j)(Sum_i c_i r_i^2) - (1/N)(Sum_i c_i r_i)^2,
// r_i = y_i - y_i^d. Tiny negative rounding is clamped to 0.
double eval_fc_fast(const ImageGrid& y, const DensePrediction& dense);

// 4-neighborhood pairwise term over right/below edges:
//   Sum_edges c_i c_k ((y_k - y_i) - (y_k^d - y_i^d))^2.
double eval_lc(const ImageGrid& y, const DensePrediction& dense);

// Full breakdown; the fully-connected component uses the fast form.
EnergyBreakdown eval_energy(const ImageGrid& y, const SparseDepthMap& sparse,
                            const DensePrediction& dense,
                            const FusionParams& params);

// Dense normal-equations oracle: builds the explicit N x N system A, b with
//   E(y) = y'Ay - 2 y'b + const.
// A = A_s + A_d; A_s is diagonal alpha*c_s; A_d combines the factorized
// all-pairs coefficients and the grid-edge coefficients. Expects `dense`
// confidences already epsilon-adjusted (see with_epsilon) when the result
// is to be compared with the solver. Throws SizeError above
// kDenseOracleMaxPixels and SingularSystem when A is identically zero.
void build_dense_system(const SparseDepthMap& sparse,
                        const DensePrediction& dense,
                        const FusionParams& params, Eigen::MatrixXd& A,
                        Eigen::VectorXd& b);

}  // namespace dfuse
