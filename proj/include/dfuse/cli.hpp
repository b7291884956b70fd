#pragma once

#include <cstdint>
#include <vector>

#include "dfuse/confidence.hpp"
#include "dfuse/core.hpp"
#include "dfuse/synth.hpp"

namespace dfuse::cli {

// Exit codes: 0 success, 1 solver did not converge (outputs still written),
// 2 usage or input error.
int run(int argc, const char* const* argv);

// Hyperparameter sweep over a seeded synthetic corpus; one result row per
// (beta, gamma) pair, error the median over seeds. Shared by the `sweep`
// subcommand and the test harness.
struct SweepConfig {
  SceneSpec scene;
  DegradationSpec degradation;
  int blur_radius = 2;
  DenseBias bias{0.05, 1.0};
  double alpha = 10.0;
  std::vector<double> betas{1.0};
  std::vector<double> gammas{1.0};
  int seed_count = 8;
  std::uint64_t base_seed = 1;
  bool oracle_confidence = false;
  ConfidenceParams conf_params = ConfidenceParams::sparse_defaults();
  double cg_tolerance = 1e-6;
  int cg_max_iters = 500;
};

struct SweepPoint {
  double beta = 0.0;
  double gamma = 0.0;
  double median_error = 0.0;
};

std::vector<SweepPoint> run_sweep(const SweepConfig& config);

}  // namespace dfuse::cli
