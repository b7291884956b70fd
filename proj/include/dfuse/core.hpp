#pragma once

#include <cstdint>
#include <vector>

#include "dfuse/errors.hpp"

namespace dfuse {

// Dense row-major 2-D scalar field. The universal carrier for depth,
// log-depth, confidence and intensity maps.
struct ImageGrid {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  ImageGrid() = default;
  ImageGrid(int w, int h, double fill = 0.0);

  int size() const { return width * height; }
  int index(int x, int y) const { return y * width + x; }

  double& operator[](int i) { return values[i]; }
  double operator[](int i) const { return values[i]; }
  double& at(int x, int y) { return values[index(x, y)]; }
  double at(int x, int y) const { return values[index(x, y)]; }

  bool same_shape(const ImageGrid& o) const {
    return width == o.width && height == o.height;
  }
};

struct ValidityMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> valid;

  ValidityMask() = default;
  ValidityMask(int w, int h, bool fill = false);

  int size() const { return width * height; }
  int index(int x, int y) const { return y * width + x; }
  bool is_valid(int i) const { return valid[i] != 0; }
  void set(int i, bool v) { valid[i] = v ? 1 : 0; }

  int count() const;

  bool same_shape(const ImageGrid& g) const {
    return width == g.width && height == g.height;
  }
  bool same_shape(const ValidityMask& o) const {
    return width == o.width && height == o.height;
  }
};

// Partial log-depth observations with per-pixel confidence.
// Confidence is zero wherever the mask is invalid.
struct SparseDepthMap {
  ImageGrid log_depth;
  ValidityMask mask;
  ImageGrid confidence;

  SparseDepthMap() = default;
  // Validates the cross-field invariants; throws ShapeError / RangeError /
  // DomainError on violation.
  SparseDepthMap(ImageGrid log_depth_in, ValidityMask mask_in,
                 ImageGrid confidence_in);
};

// Dense log-depth prior with per-pixel confidence (the virtual sensor).
struct DensePrediction {
  ImageGrid log_depth;
  ImageGrid confidence;

  DensePrediction() = default;
  DensePrediction(ImageGrid log_depth_in, ImageGrid confidence_in);
};

// CRF weights and solver controls.
struct FusionParams {
  double alpha = 10.0;   // unary weight
  double beta = 0.0;     // fully-connected weight
  double gamma = 0.0;    // local grid weight
  double epsilon = 1e-4; // added to dense confidence at assembly
  double cg_tolerance = 1e-6;
  int cg_max_iters = 500;
  bool jacobi_preconditioner = true;
  // alpha == 0 is only legal in gauge-fixed mode: the system is singular
  // along the constant vector and the solution mean is pinned to mean(y_d).
  bool gauge_fixed = false;

  void validate() const;
};

// Elementwise natural log of a depth map in meters.
// Throws DomainError naming the first offending pixel if a depth is <= 0
// (or non-finite). With a mask, only valid pixels are converted; invalid
// pixels are set to 0.
ImageGrid to_log_depth(const ImageGrid& depth);
ImageGrid to_log_depth(const ImageGrid& depth, const ValidityMask& mask);

// Elementwise exp; inverse of to_log_depth.
ImageGrid from_log_depth(const ImageGrid& log_depth);

}  // namespace dfuse
