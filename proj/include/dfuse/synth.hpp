#pragma once

#include <cstdint>

#include "dfuse/core.hpp"

namespace dfuse {

// Piecewise-planar (in inverse depth) synthetic scene. Deterministic for a
// fixed seed; all randomness comes from a seeded mt19937_64 with hand-rolled
// uniform/normal draws so generated fixtures are stable across platforms.
struct SceneSpec {
  int width = 96;
  int height = 72;
  int plane_count = 4;
  double depth_min = 1.0;
  double depth_max = 5.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct Scene {
  ImageGrid depth;      // meters, within [depth_min, depth_max]
  ImageGrid intensity;  // [0,1], correlated with plane identity
};

Scene generate_scene(const SceneSpec& spec);

struct DegradationSpec {
  double keep_fraction = 0.2;
  double outlier_fraction = 0.0;
  double outlier_scale_min = 2.0;
  double outlier_scale_max = 8.0;
  double global_scale = 1.0;     // simulates the unknown map scale
  double noise_sigma_log = 0.0;  // multiplicative log-normal depth noise
  bool gradient_biased_sampling = false;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SparseObservation {
  SparseDepthMap map;
  ValidityMask outliers;  // which kept pixels carry an injected outlier
};

// Samples floor(keep_fraction * N) pixels (weighted by image-gradient
// magnitude when gradient_biased_sampling is set), applies the global
// scale, injects floor(outlier_fraction * kept) outliers and log-normal
// noise. Kept pixels start with confidence 1.
SparseObservation degrade_to_sparse(const ImageGrid& gt_depth,
                                    const ImageGrid& intensity,
                                    const DegradationSpec& spec);

// Depth-proportional log bias: log_depth += slope * (depth - ref_depth).
struct DenseBias {
  double slope = 0.0;
  double ref_depth = 1.0;
};

// CNN-like virtual sensor: box blur of the log-depth map (edge softening)
// plus a depth-proportional bias. Confidence starts at 1.
DensePrediction degrade_to_dense(const ImageGrid& gt_depth, int blur_radius,
                                 const DenseBias& bias);

struct RemovalResult {
  ValidityMask remaining;
  ValidityMask removed;  // evaluation mask: previously valid, now dropped
};

// Invalidates a random axis-aligned rectangle with side lengths drawn from
// [min_size, max_size]. A zero-area rectangle is rejected with a warning
// and leaves the mask unchanged.
RemovalResult crop_rectangle(const ValidityMask& mask, std::uint64_t rng_seed,
                             int min_size, int max_size);

// Uniformly removes floor(fraction * valid) points.
RemovalResult remove_fraction(const ValidityMask& mask, double fraction,
                              std::uint64_t rng_seed);

}  // namespace dfuse
