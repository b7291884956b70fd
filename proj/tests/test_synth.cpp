#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dfuse/metrics.hpp"
#include "dfuse/synth.hpp"
#include "oracles.hpp"

using namespace dfuse;

TEST_CASE("scene generation") {
  SceneSpec spec;
  spec.rng_seed = 51;
  const Scene scene = generate_scene(spec);

  SUBCASE("depth stays inside the declared range") {
    for (double d : scene.depth.values) {
      CHECK(d >= spec.depth_min);
      CHECK(d <= spec.depth_max);
    }
    for (double v : scene.intensity.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  SUBCASE("deterministic for a fixed seed, distinct across seeds") {
    const Scene again = generate_scene(spec);
    CHECK(again.depth.values == scene.depth.values);
    CHECK(again.intensity.values == scene.intensity.values);
    SceneSpec other = spec;
    other.rng_seed = 52;
    CHECK(generate_scene(other).depth.values != scene.depth.values);
  }
  SUBCASE("single plane: depth is affine in inverse depth") {
    SceneSpec one = spec;
    one.plane_count = 1;
    const Scene s = generate_scene(one);
    // q(x,y) affine => q(x+1,y) - q(x,y) constant along each row
    const auto& d = s.depth;
    const double dq0 = 1.0 / d.at(1, 0) - 1.0 / d.at(0, 0);
    for (int y = 0; y < d.height; ++y) {
      for (int x = 0; x + 1 < d.width; ++x) {
        CHECK(1.0 / d.at(x + 1, y) - 1.0 / d.at(x, y) ==
              doctest::Approx(dq0).epsilon(1e-9));
      }
    }
  }
  SUBCASE("spec validation") {
    SceneSpec bad = spec;
    bad.depth_min = 0.0;
    CHECK_THROWS_AS(generate_scene(bad), RangeError);
    bad = spec;
    bad.plane_count = 0;
    CHECK_THROWS_AS(generate_scene(bad), RangeError);
  }
}

TEST_CASE("sparse degradation") {
  SceneSpec sspec;
  sspec.rng_seed = 53;
  const Scene scene = generate_scene(sspec);
  const int n = scene.depth.size();

  SUBCASE("exact kept and outlier counts") {
    DegradationSpec d;
    d.keep_fraction = 0.2;
    d.outlier_fraction = 0.1;
    d.rng_seed = 1;
    const SparseObservation obs = degrade_to_sparse(scene.depth,
                                                    scene.intensity, d);
    const int kept = static_cast<int>(0.2 * n);
    CHECK(obs.map.mask.count() == kept);
    CHECK(obs.outliers.count() == static_cast<int>(0.1 * kept));
    // outliers are a subset of kept pixels
    for (int i = 0; i < n; ++i) {
      if (obs.outliers.is_valid(i)) CHECK(obs.map.mask.is_valid(i));
    }
  }
  SUBCASE("keep_fraction = 1 keeps every pixel") {
    DegradationSpec d;
    d.keep_fraction = 1.0;
    d.rng_seed = 2;
    const SparseObservation obs = degrade_to_sparse(scene.depth,
                                                    scene.intensity, d);
    CHECK(obs.map.mask.count() == n);
  }
  SUBCASE("clean kept pixels reproduce the scaled ground truth") {
    DegradationSpec d;
    d.keep_fraction = 0.3;
    d.global_scale = 2.5;
    d.rng_seed = 3;
    const SparseObservation obs = degrade_to_sparse(scene.depth,
                                                    scene.intensity, d);
    for (int i = 0; i < n; ++i) {
      if (!obs.map.mask.is_valid(i)) continue;
      CHECK(obs.map.log_depth[i] ==
            doctest::Approx(std::log(2.5 * scene.depth[i])).epsilon(1e-10));
    }
  }
  SUBCASE("outliers are far off, non-outliers near the truth") {
    DegradationSpec d;
    d.keep_fraction = 0.3;
    d.outlier_fraction = 0.2;
    d.rng_seed = 4;
    const SparseObservation obs = degrade_to_sparse(scene.depth,
                                                    scene.intensity, d);
    for (int i = 0; i < n; ++i) {
      if (!obs.map.mask.is_valid(i)) continue;
      const double err = std::abs(obs.map.log_depth[i] -
                                  std::log(scene.depth[i]));
      if (obs.outliers.is_valid(i)) {
        CHECK(err >= std::log(d.outlier_scale_min) - 1e-9);
        CHECK(err <= std::log(d.outlier_scale_max) + 1e-9);
      } else {
        CHECK(err <= 1e-10);
      }
    }
  }
  SUBCASE("a global scale never changes the scale-invariant error") {
    DegradationSpec d;
    d.keep_fraction = 0.25;
    d.noise_sigma_log = 0.05;
    d.rng_seed = 5;
    const SparseObservation a = degrade_to_sparse(scene.depth,
                                                  scene.intensity, d);
    d.global_scale = 4.0;
    const SparseObservation b = degrade_to_sparse(scene.depth,
                                                  scene.intensity, d);
    CHECK(a.map.mask.count() == b.map.mask.count());
    const ImageGrid gt_log = to_log_depth(scene.depth);
    const double ea = scale_invariant_error(a.map.log_depth, gt_log,
                                            a.map.mask);
    const double eb = scale_invariant_error(b.map.log_depth, gt_log,
                                            b.map.mask);
    CHECK(ea == doctest::Approx(eb).epsilon(1e-9));
    CHECK(ea > 0.0);
  }
  SUBCASE("gradient-biased sampling concentrates near intensity edges") {
    DegradationSpec plain;
    plain.keep_fraction = 0.1;
    plain.rng_seed = 6;
    DegradationSpec biased = plain;
    biased.gradient_biased_sampling = true;
    const SparseObservation u = degrade_to_sparse(scene.depth,
                                                  scene.intensity, plain);
    const SparseObservation g = degrade_to_sparse(scene.depth,
                                                  scene.intensity, biased);
    auto mean_grad = [&](const ValidityMask& m) {
      double s = 0.0;
      int c = 0;
      const auto& im = scene.intensity;
      for (int y = 0; y < im.height; ++y) {
        for (int x = 0; x < im.width; ++x) {
          if (!m.is_valid(im.index(x, y))) continue;
          const double gx =
              x + 1 < im.width ? im.at(x + 1, y) - im.at(x, y) : 0.0;
          const double gy =
              y + 1 < im.height ? im.at(x, y + 1) - im.at(x, y) : 0.0;
          s += std::hypot(gx, gy);
          ++c;
        }
      }
      return s / c;
    };
    CHECK(mean_grad(g.map.mask) > mean_grad(u.map.mask));
  }
}

TEST_CASE("dense degradation") {
  SceneSpec sspec;
  sspec.rng_seed = 54;
  const Scene scene = generate_scene(sspec);
  const ImageGrid gt_log = to_log_depth(scene.depth);

  SUBCASE("radius 0 with no bias is the identity") {
    const DensePrediction p = degrade_to_dense(scene.depth, 0, {});
    for (int i = 0; i < gt_log.size(); ++i) {
      CHECK(p.log_depth[i] == doctest::Approx(gt_log[i]).epsilon(1e-12));
      CHECK(p.confidence[i] == 1.0);
    }
  }
  SUBCASE("blur error concentrates at depth discontinuities") {
    const DensePrediction p = degrade_to_dense(scene.depth, 2, {});
    // split pixels by ground-truth local contrast; planes slope gently, so
    // the top decile of contrasts marks plane boundaries and the bottom
    // half marks plane interiors
    const auto& d = gt_log;
    std::vector<double> contrasts;
    auto contrast_at = [&](int x, int y) {
      return std::abs(d.at(x + 1, y) - d.at(x - 1, y)) +
             std::abs(d.at(x, y + 1) - d.at(x, y - 1));
    };
    for (int y = 1; y + 1 < d.height; ++y) {
      for (int x = 1; x + 1 < d.width; ++x) {
        contrasts.push_back(contrast_at(x, y));
      }
    }
    std::vector<double> sorted = contrasts;
    std::sort(sorted.begin(), sorted.end());
    const double edge_thresh = sorted[sorted.size() * 9 / 10];
    const double flat_thresh = sorted[sorted.size() / 2];
    double edge_err = 0.0, flat_err = 0.0;
    int edge_n = 0, flat_n = 0, k = 0;
    for (int y = 1; y + 1 < d.height; ++y) {
      for (int x = 1; x + 1 < d.width; ++x, ++k) {
        const double err = std::abs(p.log_depth.at(x, y) - d.at(x, y));
        if (contrasts[k] > edge_thresh) {
          edge_err += err;
          ++edge_n;
        } else if (contrasts[k] <= flat_thresh) {
          flat_err += err;
          ++flat_n;
        }
      }
    }
    REQUIRE(edge_n > 0);
    REQUIRE(flat_n > 0);
    CHECK(edge_err / edge_n > 3.0 * (flat_err / flat_n + 1e-12));
  }
  SUBCASE("depth-proportional bias grows with depth") {
    DenseBias bias{0.1, 1.0};
    const DensePrediction p = degrade_to_dense(scene.depth, 0, bias);
    for (int i = 0; i < gt_log.size(); ++i) {
      CHECK(p.log_depth[i] - gt_log[i] ==
            doctest::Approx(0.1 * (scene.depth[i] - 1.0)).epsilon(1e-10));
    }
  }
}

TEST_CASE("mask surgery") {
  SceneSpec sspec;
  sspec.rng_seed = 55;
  const Scene scene = generate_scene(sspec);
  DegradationSpec d;
  d.keep_fraction = 0.3;
  d.rng_seed = 7;
  const ValidityMask base =
      degrade_to_sparse(scene.depth, scene.intensity, d).map.mask;
  const int total = base.count();

  SUBCASE("remove_fraction partitions the valid set") {
    const RemovalResult r = remove_fraction(base, 2.0 / 3.0, 8);
    CHECK(r.removed.count() == static_cast<int>(total * 2.0 / 3.0));
    CHECK(r.remaining.count() + r.removed.count() == total);
    for (int i = 0; i < scene.depth.size(); ++i) {
      // disjoint, and both subsets of the original mask
      CHECK(!(r.remaining.is_valid(i) && r.removed.is_valid(i)));
      if (r.remaining.is_valid(i) || r.removed.is_valid(i)) {
        CHECK(base.is_valid(i));
      }
    }
  }
  SUBCASE("crop_rectangle removes a contiguous block") {
    const RemovalResult r = crop_rectangle(base, 9, 16, 32);
    CHECK(r.remaining.count() + r.removed.count() == total);
    CHECK(r.removed.count() > 0);
    // removed pixels fit in one bounding box no larger than max_size
    int x0 = 1 << 30, x1 = -1, y0 = 1 << 30, y1 = -1;
    for (int y = 0; y < scene.depth.height; ++y) {
      for (int x = 0; x < scene.depth.width; ++x) {
        if (!r.removed.is_valid(scene.depth.index(x, y))) continue;
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
    CHECK(x1 - x0 + 1 <= 32);
    CHECK(y1 - y0 + 1 <= 32);
  }
  SUBCASE("degradation spec validation") {
    DegradationSpec bad;
    bad.keep_fraction = 0.0;
    CHECK_THROWS_AS(degrade_to_sparse(scene.depth, scene.intensity, bad),
                    RangeError);
    bad = {};
    bad.outlier_fraction = 1.5;
    CHECK_THROWS_AS(degrade_to_sparse(scene.depth, scene.intensity, bad),
                    RangeError);
  }
}
