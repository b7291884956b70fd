#include "dfuse/solver.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "dfuse/energy.hpp"

namespace dfuse {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void subtract_mean(std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  for (double& x : v) x -= m;
}

}  // namespace

std::vector<double> matvec(const std::vector<double>& v,
                           const FusionProblem& problem) {
  const int n = problem.pixel_count();
  const int w = problem.sparse.log_depth.width;
  const int h = problem.sparse.log_depth.height;
  const auto& cs = problem.sparse.confidence;
  const auto& cd = problem.dense.confidence;
  const auto& mask = problem.sparse.mask;
  const double alpha = problem.params.alpha;
  const double bn = problem.params.beta / n;
  const double gamma = problem.params.gamma;

  double cv = 0.0;  // <c_d, v>
  for (int i = 0; i < n; ++i) cv += cd[i] * v[i];

  std::vector<double> out(n);
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const int i = py * w + px;
      double acc = bn * cd[i] * (problem.conf_sum * v[i] - cv);
      if (mask.is_valid(i)) acc += alpha * cs[i] * v[i];
      if (gamma != 0.0) {
        // summed as c_k (v_i - v_k) so a constant v cancels exactly
        double nsum = 0.0;
        if (px > 0) nsum += cd[i - 1] * (v[i] - v[i - 1]);
        if (px + 1 < w) nsum += cd[i + 1] * (v[i] - v[i + 1]);
        if (py > 0) nsum += cd[i - w] * (v[i] - v[i - w]);
        if (py + 1 < h) nsum += cd[i + w] * (v[i] - v[i + w]);
        acc += gamma * cd[i] * nsum;
      }
      out[i] = acc;
    }
  }
  return out;
}

FusionProblem assemble(const SparseDepthMap& sparse,
                       const DensePrediction& dense,
                       const FusionParams& params) {
  params.validate();
  if (!sparse.log_depth.same_shape(dense.log_depth)) {
    throw ShapeError("sparse/dense dimension mismatch");
  }
  if (!params.gauge_fixed) {
    double unary_weight = 0.0;
    for (int i = 0; i < sparse.confidence.size(); ++i) {
      if (sparse.mask.is_valid(i)) unary_weight += sparse.confidence[i];
    }
    if (!(params.alpha * unary_weight > 0.0)) {
      throw SingularSystem(
          "no unary evidence: need alpha > 0 and at least one valid sparse "
          "pixel with nonzero confidence (or gauge-fixed mode)");
    }
  }

  FusionProblem p;
  p.sparse = sparse;
  p.dense = with_epsilon(dense, params.epsilon);
  p.params = params;

  const int n = p.pixel_count();
  const int w = sparse.log_depth.width, h = sparse.log_depth.height;
  const auto& cd = p.dense.confidence;
  const auto& yd = p.dense.log_depth;

  p.conf_sum = 0.0;
  double cyd = 0.0;  // <c_d, y_d>
  for (int i = 0; i < n; ++i) {
    p.conf_sum += cd[i];
    cyd += cd[i] * yd[i];
  }

  p.neighbor_conf.assign(n, 0.0);
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const int i = py * w + px;
      double s = 0.0;
      if (px > 0) s += cd[i - 1];
      if (px + 1 < w) s += cd[i + 1];
      if (py > 0) s += cd[i - w];
      if (py + 1 < h) s += cd[i + w];
      p.neighbor_conf[i] = s;
    }
  }

  const double bn = params.beta / n;
  p.rhs.assign(n, 0.0);
  p.diag.assign(n, 0.0);
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const int i = py * w + px;
      double b = bn * cd[i] * (p.conf_sum * yd[i] - cyd);
      double d = bn * cd[i] * (p.conf_sum - cd[i]);
      if (sparse.mask.is_valid(i)) {
        b += params.alpha * sparse.confidence[i] * sparse.log_depth[i];
        d += params.alpha * sparse.confidence[i];
      }
      if (params.gamma != 0.0) {
        double nsum = 0.0;
        if (px > 0) nsum += cd[i - 1] * (yd[i] - yd[i - 1]);
        if (px + 1 < w) nsum += cd[i + 1] * (yd[i] - yd[i + 1]);
        if (py > 0) nsum += cd[i - w] * (yd[i] - yd[i - w]);
        if (py + 1 < h) nsum += cd[i + w] * (yd[i] - yd[i + w]);
        b += params.gamma * cd[i] * nsum;
        d += params.gamma * cd[i] * p.neighbor_conf[i];
      }
      p.rhs[i] = b;
      p.diag[i] = d;
    }
  }
  return p;
}

SolveReport solve_cg(const FusionProblem& problem,
                     const std::optional<ImageGrid>& initial_guess,
                     const IterationHook& hook) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = problem.pixel_count();
  const int w = problem.sparse.log_depth.width;
  const int h = problem.sparse.log_depth.height;
  const bool gauge = problem.params.gauge_fixed;

  SolveReport report;
  report.solution = ImageGrid(w, h);

  const double bnorm = norm2(problem.rhs);
  if (bnorm == 0.0) {
    bool has_unary = false;
    for (int i = 0; i < n; ++i) {
      if (problem.sparse.mask.is_valid(i) &&
          problem.params.alpha * problem.sparse.confidence[i] > 0.0) {
        has_unary = true;
        break;
      }
    }
    if (!has_unary && !gauge) {
      throw SingularSystem("zero right-hand side and no unary evidence");
    }
    // A is PD (or PSD with consistent rhs): y = 0 is the solution.
    report.converged = true;
    report.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return report;
  }

  std::vector<double> x(n);
  if (initial_guess) {
    if (!initial_guess->same_shape(problem.dense.log_depth)) {
      throw ShapeError("initial guess dimension mismatch");
    }
    x = initial_guess->values;
  } else {
    x = problem.dense.log_depth.values;
  }

  std::vector<double> precond(n, 1.0);
  if (problem.params.jacobi_preconditioner) {
    for (int i = 0; i < n; ++i) {
      precond[i] = problem.diag[i] > 0.0 ? 1.0 / problem.diag[i] : 1.0;
    }
  }

  auto r = matvec(x, problem);
  for (int i = 0; i < n; ++i) r[i] = problem.rhs[i] - r[i];
  if (gauge) subtract_mean(r);

  std::vector<double> z(n), p(n), Ap;
  for (int i = 0; i < n; ++i) z[i] = precond[i] * r[i];
  if (gauge) subtract_mean(z);
  p = z;
  double rz = dot(r, z);
  double rel = norm2(r) / bnorm;

  const double tol = problem.params.cg_tolerance;
  int iter = 0;
  while (rel > tol && iter < problem.params.cg_max_iters) {
    Ap = matvec(p, problem);
    const double pAp = dot(p, Ap);
    if (!(pAp > 0.0)) break;  // numerical breakdown on a PSD system
    const double step = rz / pAp;
    for (int i = 0; i < n; ++i) {
      x[i] += step * p[i];
      r[i] -= step * Ap[i];
    }
    if (gauge) subtract_mean(r);
    ++iter;
    if (hook) hook(iter, x);
    for (int i = 0; i < n; ++i) z[i] = precond[i] * r[i];
    if (gauge) subtract_mean(z);
    const double rz_new = dot(r, z);
    const double dir = rz_new / rz;
    for (int i = 0; i < n; ++i) p[i] = z[i] + dir * p[i];
    rz = rz_new;
    rel = norm2(r) / bnorm;
  }

  if (gauge) {
    double target = std::accumulate(problem.dense.log_depth.values.begin(),
                                    problem.dense.log_depth.values.end(), 0.0) /
                    n;
    double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
    for (double& v : x) v += target - mean_x;
  }

  // Report the true residual of the returned iterate.
  auto rt = matvec(x, problem);
  for (int i = 0; i < n; ++i) rt[i] = problem.rhs[i] - rt[i];
  if (gauge) subtract_mean(rt);

  report.solution.values = std::move(x);
  report.iterations = iter;
  report.final_relative_residual = norm2(rt) / bnorm;
  report.converged = report.final_relative_residual <= tol;
  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

FuseResult fuse(const ImageGrid& sparse_depth, const ValidityMask& sparse_mask,
                const ImageGrid& sparse_confidence,
                const ImageGrid& dense_depth, const ImageGrid& dense_confidence,
                const FusionParams& params) {
  SparseDepthMap sparse(to_log_depth(sparse_depth, sparse_mask), sparse_mask,
                        sparse_confidence);
  DensePrediction dense(to_log_depth(dense_depth), dense_confidence);
  FusionProblem problem = assemble(sparse, dense, params);
  SolveReport report = solve_cg(problem);
  FuseResult result;
  result.depth = from_log_depth(report.solution);
  result.report = std::move(report);
  return result;
}

}  // namespace dfuse
