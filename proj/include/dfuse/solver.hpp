#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dfuse/core.hpp"

namespace dfuse {

// Assembled linear system A y = A_s y_s + A_d y_d in implicit form.
// Dense confidences here already carry the epsilon adjustment.
struct FusionProblem {
  SparseDepthMap sparse;
  DensePrediction dense;
  FusionParams params;

  double conf_sum = 0.0;             // S = sum of adjusted dense confidences
  std::vector<double> rhs;           // b, length N
  std::vector<double> neighbor_conf; // per-pixel sum of 4-neighbor confidences
  std::vector<double> diag;          // diag(A), for the Jacobi preconditioner

  int pixel_count() const { return sparse.log_depth.size(); }
};

struct SolveReport {
  ImageGrid solution;  // log-depth
  int iterations = 0;
  double final_relative_residual = 0.0;
  bool converged = false;
  double wall_time_sec = 0.0;
};

// Called once per CG iteration with the current iterate.
using IterationHook = std::function<void(int iter, const std::vector<double>& y)>;

// O(N) product of the system matrix with v:
//   (Av)_i = alpha c_i^s v_i
//          + (beta/N) c_i^d (S v_i - <c^d, v>)
//          + gamma c_i^d sum_{k in N4(i)} c_k^d (v_i - v_k).
std::vector<double> matvec(const std::vector<double>& v,
                           const FusionProblem& problem);

// Epsilon-adjusts the dense confidences, precomputes S, b and diag(A).
// Throws SingularSystem when alpha == 0 outside gauge-fixed mode or when
// there is no unary evidence in standard mode; ShapeError on mismatched
// dimensions.
FusionProblem assemble(const SparseDepthMap& sparse,
                       const DensePrediction& dense,
                       const FusionParams& params);

// Preconditioned conjugate gradients on the assembled system. Default
// initial guess is y_d. In gauge-fixed mode the iterates are kept
// orthogonal to the constant vector and the result is re-centered to
// mean(y_d). Non-convergence is reported, not thrown.
SolveReport solve_cg(const FusionProblem& problem,
                     const std::optional<ImageGrid>& initial_guess = {},
                     const IterationHook& hook = {});

struct FuseResult {
  ImageGrid depth;  // meters, strictly positive
  SolveReport report;
};

// End-to-end: log conversion, assembly, CG solve, exponentiation.
// Sparse depths are meters at valid pixels; dense depths are meters.
FuseResult fuse(const ImageGrid& sparse_depth, const ValidityMask& sparse_mask,
                const ImageGrid& sparse_confidence,
                const ImageGrid& dense_depth, const ImageGrid& dense_confidence,
                const FusionParams& params);

}  // namespace dfuse
