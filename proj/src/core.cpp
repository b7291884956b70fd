#include "dfuse/core.hpp"

#include <cmath>
#include <string>

namespace dfuse {

namespace {

void check_positive_dims(int w, int h) {
  if (w <= 0 || h <= 0) {
    throw ShapeError("grid dimensions must be positive, got " +
                     std::to_string(w) + "x" + std::to_string(h));
  }
}

}  // namespace

ImageGrid::ImageGrid(int w, int h, double fill) : width(w), height(h) {
  check_positive_dims(w, h);
  values.assign(static_cast<std::size_t>(w) * h, fill);
}

ValidityMask::ValidityMask(int w, int h, bool fill) : width(w), height(h) {
  check_positive_dims(w, h);
  valid.assign(static_cast<std::size_t>(w) * h, fill ? 1 : 0);
}

int ValidityMask::count() const {
  int n = 0;
  for (auto v : valid) n += (v != 0);
  return n;
}

SparseDepthMap::SparseDepthMap(ImageGrid log_depth_in, ValidityMask mask_in,
                               ImageGrid confidence_in)
    : log_depth(std::move(log_depth_in)),
      mask(std::move(mask_in)),
      confidence(std::move(confidence_in)) {
  if (!mask.same_shape(log_depth) || !log_depth.same_shape(confidence)) {
    throw ShapeError("sparse map fields have mismatched dimensions");
  }
  for (int i = 0; i < log_depth.size(); ++i) {
    const double c = confidence[i];
    if (!(c >= 0.0 && c <= 1.0)) {
      throw RangeError("confidence out of [0,1] at pixel " + std::to_string(i));
    }
    if (!mask.is_valid(i)) {
      if (c != 0.0) {
        throw RangeError("nonzero confidence at invalid pixel " +
                         std::to_string(i));
      }
    } else if (!std::isfinite(log_depth[i])) {
      throw DomainError("non-finite log depth at valid pixel " +
                        std::to_string(i));
    }
  }
}

DensePrediction::DensePrediction(ImageGrid log_depth_in,
                                 ImageGrid confidence_in)
    : log_depth(std::move(log_depth_in)),
      confidence(std::move(confidence_in)) {
  if (!log_depth.same_shape(confidence)) {
    throw ShapeError("dense prediction fields have mismatched dimensions");
  }
  for (int i = 0; i < log_depth.size(); ++i) {
    if (!std::isfinite(log_depth[i])) {
      throw DomainError("non-finite dense log depth at pixel " +
                        std::to_string(i));
    }
    const double c = confidence[i];
    if (!(c >= 0.0 && c <= 1.0)) {
      throw RangeError("dense confidence out of [0,1] at pixel " +
                       std::to_string(i));
    }
  }
}

void FusionParams::validate() const {
  if (alpha < 0 || beta < 0 || gamma < 0) {
    throw RangeError("CRF weights must be non-negative");
  }
  if (!(epsilon > 0)) throw RangeError("epsilon must be positive");
  if (!(cg_tolerance > 0)) throw RangeError("cg_tolerance must be positive");
  if (cg_max_iters <= 0) throw RangeError("cg_max_iters must be positive");
  if (alpha == 0 && !gauge_fixed) {
    throw SingularSystem(
        "alpha == 0 leaves the solution free up to a global shift; "
        "request gauge-fixed mode to solve anyway");
  }
}

ImageGrid to_log_depth(const ImageGrid& depth) {
  ImageGrid out(depth.width, depth.height);
  for (int i = 0; i < depth.size(); ++i) {
    const double d = depth[i];
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw DomainError("non-positive depth at pixel " + std::to_string(i));
    }
    out[i] = std::log(d);
  }
  return out;
}

ImageGrid to_log_depth(const ImageGrid& depth, const ValidityMask& mask) {
  if (!mask.same_shape(depth)) {
    throw ShapeError("mask/depth dimension mismatch");
  }
  ImageGrid out(depth.width, depth.height);
  for (int i = 0; i < depth.size(); ++i) {
    if (!mask.is_valid(i)) continue;
    const double d = depth[i];
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw DomainError("non-positive depth at valid pixel " +
                        std::to_string(i));
    }
    out[i] = std::log(d);
  }
  return out;
}

ImageGrid from_log_depth(const ImageGrid& log_depth) {
  ImageGrid out(log_depth.width, log_depth.height);
  for (int i = 0; i < log_depth.size(); ++i) {
    out[i] = std::exp(log_depth[i]);
  }
  return out;
}

}  // namespace dfuse
