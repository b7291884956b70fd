#pragma once

#include <array>
#include <utility>
#include <vector>

#include "dfuse/core.hpp"

namespace dfuse {

// Delaunay triangulation of the valid sparse pixels. Vertices carry the
// pixel coordinates and the observed inverse depth (1/meters); interpolation
// happens in inverse-depth space.
struct Triangulation {
  struct Vertex {
    int x = 0;
    int y = 0;
    double inv_depth = 0.0;
  };
  std::vector<Vertex> vertices;                 // one per valid sparse pixel
  std::vector<std::array<int, 3>> triangles;    // ccw vertex-index triples
  std::vector<int> convex_hull;                 // ccw boundary polygon
};

// Bowyer-Watson insertion with exact integer predicates (pixel coordinates
// are integral, so orientation and in-circumcircle tests are computed
// without rounding). Vertices appear in row-major scan order of the valid
// pixels, which fixes the output for a given input. Throws TooFewPoints
// when fewer than 3 valid pixels exist or all are collinear.
Triangulation triangulate(const SparseDepthMap& sparse);

// Rasterizes the triangulation: every pixel inside a triangle gets the
// barycentric combination of the vertex inverse depths, converted to log
// depth. Pixels outside the convex hull are left uncovered. Vertex pixels
// reproduce their input log depth exactly.
std::pair<ImageGrid, ValidityMask> interpolate(const Triangulation& tri,
                                               const SparseDepthMap& sparse);

// Additive shift in log space so that the mean over covered pixels equals
// target_mean. Pairwise log differences are unchanged.
ImageGrid normalize_scale(const ImageGrid& log_depth,
                          const ValidityMask& coverage, double target_mean);

// Multi-source BFS fill: every pixel takes the value of its nearest valid
// pixel (4-neighbor grid distance, lowest index on ties). Fallback for maps
// that cannot be triangulated and extension of covered maps past the hull.
ImageGrid nearest_fill(const ImageGrid& values, const ValidityMask& valid);

// triangulate + interpolate, with uncovered pixels (outside the hull, or
// the whole image when triangulation is impossible) filled from the nearest
// covered pixel. Always returns full coverage; throws TooFewPoints only
// when the sparse map has no valid pixel at all.
ImageGrid densify_full(const SparseDepthMap& sparse);

}  // namespace dfuse
