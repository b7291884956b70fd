#include "dfuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <random>
#include <vector>

namespace dfuse {

namespace {

// Distribution draws are hand-rolled on top of mt19937_64 because the
// std <random> distributions are implementation-defined and the generated
// fixtures double as golden files.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

double normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// Small deterministic per-pixel hash for intra-plane texture.
double texture_hash(int x, int y, std::uint64_t seed) {
  std::uint64_t v = seed ^ (static_cast<std::uint64_t>(x) * 0x9E3779B97F4A7C15ULL) ^
                    (static_cast<std::uint64_t>(y) * 0xBF58476D1CE4E5B9ULL);
  v ^= v >> 30;
  v *= 0xBF58476D1CE4E5B9ULL;
  v ^= v >> 27;
  v *= 0x94D049BB133111EBULL;
  v ^= v >> 31;
  return static_cast<double>(v >> 11) * 0x1.0p-53;
}

ImageGrid gradient_magnitude(const ImageGrid& img) {
  const int w = img.width, h = img.height;
  ImageGrid g(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = img.at(std::min(x + 1, w - 1), y) -
                        img.at(std::max(x - 1, 0), y);
      const double gy = img.at(x, std::min(y + 1, h - 1)) -
                        img.at(x, std::max(y - 1, 0));
      g.at(x, y) = std::hypot(gx, gy);
    }
  }
  return g;
}

}  // namespace

void SceneSpec::validate() const {
  if (width <= 0 || height <= 0) throw RangeError("scene dimensions must be positive");
  if (plane_count < 1) throw RangeError("plane_count must be >= 1");
  if (!(depth_min > 0) || !(depth_max > depth_min)) {
    throw RangeError("need 0 < depth_min < depth_max");
  }
}

void DegradationSpec::validate() const {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw RangeError("keep_fraction must lie in (0,1]");
  }
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
    throw RangeError("outlier_fraction must lie in [0,1)");
  }
  if (!(outlier_scale_min > 0) || outlier_scale_max < outlier_scale_min) {
    throw RangeError("invalid outlier scale range");
  }
  if (!(global_scale > 0)) throw RangeError("global_scale must be positive");
  if (noise_sigma_log < 0) throw RangeError("noise_sigma_log must be >= 0");
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.rng_seed);
  const int w = spec.width, h = spec.height, np = spec.plane_count;
  const double q_min = 1.0 / spec.depth_max;
  const double q_max = 1.0 / spec.depth_min;
  const double diag = std::hypot(static_cast<double>(w), static_cast<double>(h));

  struct Plane {
    double cx, cy;      // Voronoi site and slope anchor
    double q0, sx, sy;  // inverse depth q = q0 + sx*(x-cx) + sy*(y-cy)
    double shade;
  };
  std::vector<Plane> planes(np);
  for (int p = 0; p < np; ++p) {
    Plane& pl = planes[p];
    pl.cx = uniform(rng, 0, w - 1);
    pl.cy = uniform(rng, 0, h - 1);
    // Keep q0 away from the range ends so a nonzero slope is always legal.
    pl.q0 = uniform(rng, q_min + 0.15 * (q_max - q_min),
                    q_max - 0.15 * (q_max - q_min));
    const double margin = std::min(pl.q0 - q_min, q_max - pl.q0);
    const double lim = margin / diag / std::numbers::sqrt2;
    pl.sx = uniform(rng, -lim, lim);
    pl.sy = uniform(rng, -lim, lim);
    pl.shade = np > 1 ? 0.15 + 0.7 * p / (np - 1.0) : 0.5;
  }

  Scene scene;
  scene.depth = ImageGrid(w, h);
  scene.intensity = ImageGrid(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int best = 0;
      double best_d = 1e300;
      for (int p = 0; p < np; ++p) {
        const double dx = x - planes[p].cx, dy = y - planes[p].cy;
        const double d = dx * dx + dy * dy;
        if (d < best_d) {
          best_d = d;
          best = p;
        }
      }
      const Plane& pl = planes[best];
      const double q = pl.q0 + pl.sx * (x - pl.cx) + pl.sy * (y - pl.cy);
      scene.depth.at(x, y) = 1.0 / q;
      scene.intensity.at(x, y) =
          pl.shade + 0.06 * texture_hash(x, y, spec.rng_seed);
    }
  }
  return scene;
}

SparseObservation degrade_to_sparse(const ImageGrid& gt_depth,
                                    const ImageGrid& intensity,
                                    const DegradationSpec& spec) {
  spec.validate();
  if (!gt_depth.same_shape(intensity)) {
    throw ShapeError("depth/intensity dimension mismatch");
  }
  std::mt19937_64 rng(spec.rng_seed);
  const int n = gt_depth.size();
  const int keep = static_cast<int>(spec.keep_fraction * n);

  std::vector<double> weight(n, 1.0);
  if (spec.gradient_biased_sampling) {
    const ImageGrid g = gradient_magnitude(intensity);
    double gmax = 0.0;
    for (int i = 0; i < n; ++i) gmax = std::max(gmax, g[i]);
    if (gmax > 0.0) {
      for (int i = 0; i < n; ++i) weight[i] = 0.05 + g[i] / gmax;
    }
  }

  // Weighted sampling without replacement via exponential keys; for uniform
  // weights this reduces to a plain uniform sample.
  std::vector<std::pair<double, int>> keys(n);
  for (int i = 0; i < n; ++i) {
    double u = uniform01(rng);
    while (u <= 0.0) u = uniform01(rng);
    keys[i] = {-std::log(u) / weight[i], i};
  }
  std::partial_sort(keys.begin(), keys.begin() + keep, keys.end());
  std::vector<int> kept(keep);
  for (int k = 0; k < keep; ++k) kept[k] = keys[k].second;
  std::sort(kept.begin(), kept.end());

  const int n_outliers = static_cast<int>(spec.outlier_fraction * keep);
  std::vector<int> order = kept;
  for (int k = static_cast<int>(order.size()) - 1; k > 0; --k) {
    const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(k + 1));
    std::swap(order[k], order[j]);
  }

  const int w = gt_depth.width, h = gt_depth.height;
  ValidityMask mask(w, h, false);
  ValidityMask outliers(w, h, false);
  ImageGrid log_depth(w, h, 0.0);
  ImageGrid conf(w, h, 0.0);

  for (int i : kept) mask.set(i, true);
  for (int k = 0; k < n_outliers; ++k) outliers.set(order[k], true);

  for (int i : kept) {
    double d = gt_depth[i] * spec.global_scale;
    if (outliers.is_valid(i)) {
      d *= uniform(rng, spec.outlier_scale_min, spec.outlier_scale_max);
    }
    if (spec.noise_sigma_log > 0.0) {
      d *= std::exp(spec.noise_sigma_log * normal(rng));
    }
    log_depth[i] = std::log(d);
    conf[i] = 1.0;
  }

  SparseObservation out;
  out.map = SparseDepthMap(std::move(log_depth), std::move(mask),
                           std::move(conf));
  out.outliers = std::move(outliers);
  return out;
}

DensePrediction degrade_to_dense(const ImageGrid& gt_depth, int blur_radius,
                                 const DenseBias& bias) {
  if (blur_radius < 0) throw RangeError("blur_radius must be >= 0");
  const int w = gt_depth.width, h = gt_depth.height;
  ImageGrid log_depth = to_log_depth(gt_depth);

  if (blur_radius > 0) {
    // Separable box blur with edge clamp.
    ImageGrid tmp(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (int k = -blur_radius; k <= blur_radius; ++k) {
          s += log_depth.at(std::clamp(x + k, 0, w - 1), y);
        }
        tmp.at(x, y) = s / (2 * blur_radius + 1);
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (int k = -blur_radius; k <= blur_radius; ++k) {
          s += tmp.at(x, std::clamp(y + k, 0, h - 1));
        }
        log_depth.at(x, y) = s / (2 * blur_radius + 1);
      }
    }
  }

  if (bias.slope != 0.0) {
    for (int i = 0; i < log_depth.size(); ++i) {
      log_depth[i] += bias.slope * (gt_depth[i] - bias.ref_depth);
    }
  }
  return DensePrediction(std::move(log_depth), ImageGrid(w, h, 1.0));
}

RemovalResult crop_rectangle(const ValidityMask& mask, std::uint64_t rng_seed,
                             int min_size, int max_size) {
  if (min_size < 0 || max_size < min_size || max_size > mask.width ||
      max_size > mask.height) {
    throw RangeError("rectangle size range does not fit the image");
  }
  RemovalResult out;
  out.remaining = mask;
  out.removed = ValidityMask(mask.width, mask.height, false);
  if (max_size == 0) {
    std::cerr << "crop_rectangle: zero-area rectangle, mask unchanged\n";
    return out;
  }
  std::mt19937_64 rng(rng_seed);
  const int rw = min_size + static_cast<int>(rng() % static_cast<std::uint64_t>(
                                max_size - min_size + 1));
  const int rh = min_size + static_cast<int>(rng() % static_cast<std::uint64_t>(
                                max_size - min_size + 1));
  if (rw == 0 || rh == 0) {
    std::cerr << "crop_rectangle: zero-area rectangle, mask unchanged\n";
    return out;
  }
  const int x0 = static_cast<int>(rng() % static_cast<std::uint64_t>(
                     mask.width - rw + 1));
  const int y0 = static_cast<int>(rng() % static_cast<std::uint64_t>(
                     mask.height - rh + 1));
  for (int y = y0; y < y0 + rh; ++y) {
    for (int x = x0; x < x0 + rw; ++x) {
      const int i = mask.index(x, y);
      if (mask.is_valid(i)) {
        out.remaining.set(i, false);
        out.removed.set(i, true);
      }
    }
  }
  return out;
}

RemovalResult remove_fraction(const ValidityMask& mask, double fraction,
                              std::uint64_t rng_seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw RangeError("fraction must lie in (0,1)");
  }
  std::vector<int> valid;
  for (int i = 0; i < mask.size(); ++i) {
    if (mask.is_valid(i)) valid.push_back(i);
  }
  std::mt19937_64 rng(rng_seed);
  for (int k = static_cast<int>(valid.size()) - 1; k > 0; --k) {
    const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(k + 1));
    std::swap(valid[k], valid[j]);
  }
  const int n_remove = static_cast<int>(fraction * valid.size());

  RemovalResult out;
  out.remaining = mask;
  out.removed = ValidityMask(mask.width, mask.height, false);
  for (int k = 0; k < n_remove; ++k) {
    out.remaining.set(valid[k], false);
    out.removed.set(valid[k], true);
  }
  return out;
}

}  // namespace dfuse
