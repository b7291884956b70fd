#include "dfuse/energy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dfuse {

namespace {

void require_same_shape(const ImageGrid& a, const ImageGrid& b,
                        const char* what) {
  if (!a.same_shape(b)) throw ShapeError(std::string("shape mismatch: ") + what);
}

void require_oracle_size(int n) {
  if (n > kDenseOracleMaxPixels) {
    throw SizeError("dense oracle limited to " +
                    std::to_string(kDenseOracleMaxPixels) + " pixels, got " +
                    std::to_string(n));
  }
}

}  // namespace

DensePrediction with_epsilon(const DensePrediction& dense, double epsilon) {
  if (!(epsilon > 0)) throw RangeError("epsilon must be positive");
  DensePrediction out = dense;
  for (int i = 0; i < out.confidence.size(); ++i) {
    out.confidence[i] = std::min(out.confidence[i] + epsilon, 1.0 + epsilon);
  }
  return out;
}

double eval_unary(const ImageGrid& y, const SparseDepthMap& sparse) {
  require_same_shape(y, sparse.log_depth, "unary");
  double e = 0.0;
  for (int i = 0; i < y.size(); ++i) {
    if (!sparse.mask.is_valid(i)) continue;
    const double r = y[i] - sparse.log_depth[i];
    e += sparse.confidence[i] * r * r;
  }
  return e;
}

double eval_fc_naive(const ImageGrid& y, const DensePrediction& dense) {
  require_same_shape(y, dense.log_depth, "fully-connected");
  const int n = y.size();
  require_oracle_size(n);
  const auto& c = dense.confidence;
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    const double ri = y[i] - dense.log_depth[i];
    for (int j = 0; j < n; ++j) {
      const double rj = y[j] - dense.log_depth[j];
      const double d = rj - ri;
      e += c[i] * c[j] * d * d;
    }
  }
  return e / (2.0 * n);
}

double eval_fc_fast(const ImageGrid& y, const DensePrediction& dense) {
  require_same_shape(y, dense.log_depth, "fully-connected");
  const int n = y.size();
  const auto& c = dense.confidence;
  double sum_c = 0.0, sum_cr = 0.0, sum_crr = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - dense.log_depth[i];
    sum_c += c[i];
    sum_cr += c[i] * r;
    sum_crr += c[i] * r * r;
  }
  double e = (sum_c * sum_crr - sum_cr * sum_cr) / n;
  if (e < 0.0) e = 0.0;  // provably nonnegative; cancellation only
  return e;
}

double eval_lc(const ImageGrid& y, const DensePrediction& dense) {
  require_same_shape(y, dense.log_depth, "local");
  const auto& c = dense.confidence;
  const int w = y.width, h = y.height;
  double e = 0.0;
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const int i = py * w + px;
      if (px + 1 < w) {
        const int k = i + 1;
        const double d = (y[k] - y[i]) - (dense.log_depth[k] - dense.log_depth[i]);
        e += c[i] * c[k] * d * d;
      }
      if (py + 1 < h) {
        const int k = i + w;
        const double d = (y[k] - y[i]) - (dense.log_depth[k] - dense.log_depth[i]);
        e += c[i] * c[k] * d * d;
      }
    }
  }
  return e;
}

EnergyBreakdown eval_energy(const ImageGrid& y, const SparseDepthMap& sparse,
                            const DensePrediction& dense,
                            const FusionParams& params) {
  require_same_shape(y, sparse.log_depth, "energy");
  require_same_shape(y, dense.log_depth, "energy");
  EnergyBreakdown out;
  out.unary = eval_unary(y, sparse);
  out.fully_connected = eval_fc_fast(y, dense);
  out.local = eval_lc(y, dense);
  out.total = params.alpha * out.unary + params.beta * out.fully_connected +
              params.gamma * out.local;
  return out;
}

void build_dense_system(const SparseDepthMap& sparse,
                        const DensePrediction& dense,
                        const FusionParams& params, Eigen::MatrixXd& A,
                        Eigen::VectorXd& b) {
  require_same_shape(sparse.log_depth, dense.log_depth, "system");
  const int n = sparse.log_depth.size();
  require_oracle_size(n);
  const int w = sparse.log_depth.width, h = sparse.log_depth.height;
  const auto& c = dense.confidence;

  A.setZero(n, n);
  Eigen::VectorXd ys = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd yd(n);
  Eigen::MatrixXd As = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    yd[i] = dense.log_depth[i];
    if (sparse.mask.is_valid(i)) {
      As(i, i) = params.alpha * sparse.confidence[i];
      ys[i] = sparse.log_depth[i];
    }
  }

  double sum_c = 0.0;
  for (int i = 0; i < n; ++i) sum_c += c[i];

  // Fully-connected block of A_d.
  const double bn = params.beta / n;
  for (int i = 0; i < n; ++i) {
    A(i, i) += bn * c[i] * (sum_c - c[i]);
    for (int j = 0; j < n; ++j) {
      if (j != i) A(i, j) -= bn * c[i] * c[j];
    }
  }
  // Grid-edge block of A_d: each right/below edge contributes to both ends.
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const int i = py * w + px;
      for (const int k : {px + 1 < w ? i + 1 : -1, py + 1 < h ? i + w : -1}) {
        if (k < 0) continue;
        const double cc = params.gamma * c[i] * c[k];
        A(i, i) += cc;
        A(k, k) += cc;
        A(i, k) -= cc;
        A(k, i) -= cc;
      }
    }
  }

  b = A * yd + As * ys;
  A += As;

  if (A.lpNorm<Eigen::Infinity>() == 0.0) {
    throw SingularSystem("system matrix is identically zero: no evidence");
  }
}

}  // namespace dfuse
