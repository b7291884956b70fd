#include "dfuse/densify.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <string>

namespace dfuse {

namespace {

using boost::multiprecision::int256_t;

struct Pt {
  std::int64_t x = 0;
  std::int64_t y = 0;
};

// Super-triangle coordinate scale. Large enough that the three synthetic
// vertices lie outside the circumcircle of every triple of real points
// (pixel coordinates are bounded by ~1e4, so circumradii stay below ~1e11),
// yet small enough for the in-circle determinant to fit in 256 bits.
constexpr std::int64_t kSuperScale = 1'000'000'000'000LL;

__int128 orient(const Pt& a, const Pt& b, const Pt& c) {
  return static_cast<__int128>(b.x - a.x) * (c.y - a.y) -
         static_cast<__int128>(b.y - a.y) * (c.x - a.x);
}

// > 0 iff d lies strictly inside the circumcircle of ccw triangle (a,b,c).
int256_t incircle(const Pt& a, const Pt& b, const Pt& c, const Pt& d) {
  const int256_t adx = a.x - d.x, ady = a.y - d.y;
  const int256_t bdx = b.x - d.x, bdy = b.y - d.y;
  const int256_t cdx = c.x - d.x, cdy = c.y - d.y;
  const int256_t ad = adx * adx + ady * ady;
  const int256_t bd = bdx * bdx + bdy * bdy;
  const int256_t cd = cdx * cdx + cdy * cdy;
  return ad * (bdx * cdy - cdx * bdy) - bd * (adx * cdy - cdx * ady) +
         cd * (adx * bdy - bdx * ady);
}

struct Tri {
  int v[3];
  bool alive = true;
};

}  // namespace

Triangulation triangulate(const SparseDepthMap& sparse) {
  Triangulation out;
  const int w = sparse.log_depth.width, h = sparse.log_depth.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int i = y * w + x;
      if (!sparse.mask.is_valid(i)) continue;
      out.vertices.push_back(
          {x, y, std::exp(-sparse.log_depth[i])});
    }
  }
  const int np = static_cast<int>(out.vertices.size());
  if (np < 3) throw TooFewPoints("need at least 3 valid points, have " +
                                 std::to_string(np));

  std::vector<Pt> pts(np + 3);
  for (int i = 0; i < np; ++i) {
    pts[i] = {out.vertices[i].x, out.vertices[i].y};
  }

  bool collinear = true;
  for (int k = 2; k < np && collinear; ++k) {
    if (orient(pts[0], pts[1], pts[k]) != 0) collinear = false;
  }
  if (collinear) throw TooFewPoints("all valid points are collinear");

  pts[np] = {-kSuperScale, -kSuperScale};
  pts[np + 1] = {3 * kSuperScale, -kSuperScale};
  pts[np + 2] = {-kSuperScale, 3 * kSuperScale};

  std::vector<Tri> tris;
  tris.push_back({{np, np + 1, np + 2}, true});

  std::vector<int> bad;
  for (int p = 0; p < np; ++p) {
    bad.clear();
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (!tris[t].alive) continue;
      if (incircle(pts[tris[t].v[0]], pts[tris[t].v[1]], pts[tris[t].v[2]],
                   pts[p]) > 0) {
        bad.push_back(t);
      }
    }
    // Directed edges of the cavity boundary keep the ccw order, so the new
    // triangles (u, v, p) come out ccw without re-orienting.
    std::map<std::pair<int, int>, int> edge_count;
    for (int t : bad) {
      for (int e = 0; e < 3; ++e) {
        const int u = tris[t].v[e], v = tris[t].v[(e + 1) % 3];
        edge_count[{std::min(u, v), std::max(u, v)}]++;
      }
    }
    for (int t : bad) {
      for (int e = 0; e < 3; ++e) {
        const int u = tris[t].v[e], v = tris[t].v[(e + 1) % 3];
        if (edge_count[{std::min(u, v), std::max(u, v)}] == 1) {
          tris.push_back({{u, v, p}, true});
        }
      }
      tris[t].alive = false;
    }
  }

  for (const Tri& t : tris) {
    if (!t.alive) continue;
    if (t.v[0] >= np || t.v[1] >= np || t.v[2] >= np) continue;
    out.triangles.push_back({t.v[0], t.v[1], t.v[2]});
  }

  // Hull: directed edges used by exactly one kept triangle, chained ccw.
  std::map<std::pair<int, int>, int> undirected;
  for (const auto& t : out.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int u = t[e], v = t[(e + 1) % 3];
      undirected[{std::min(u, v), std::max(u, v)}]++;
    }
  }
  std::map<int, int> next;
  for (const auto& t : out.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int u = t[e], v = t[(e + 1) % 3];
      if (undirected[{std::min(u, v), std::max(u, v)}] == 1) next[u] = v;
    }
  }
  if (!next.empty()) {
    const int start = next.begin()->first;
    int cur = start;
    do {
      out.convex_hull.push_back(cur);
      cur = next.at(cur);
    } while (cur != start &&
             out.convex_hull.size() <= next.size());
  }
  return out;
}

std::pair<ImageGrid, ValidityMask> interpolate(const Triangulation& tri,
                                               const SparseDepthMap& sparse) {
  const int w = sparse.log_depth.width, h = sparse.log_depth.height;
  ImageGrid log_depth(w, h, 0.0);
  ValidityMask coverage(w, h, false);

  auto edge = [](const Triangulation::Vertex& a, const Triangulation::Vertex& b,
                 int px, int py) -> std::int64_t {
    return static_cast<std::int64_t>(b.x - a.x) * (py - a.y) -
           static_cast<std::int64_t>(b.y - a.y) * (px - a.x);
  };

  for (const auto& t : tri.triangles) {
    const auto& v0 = tri.vertices[t[0]];
    const auto& v1 = tri.vertices[t[1]];
    const auto& v2 = tri.vertices[t[2]];
    const int x0 = std::max(0, std::min({v0.x, v1.x, v2.x}));
    const int x1 = std::min(w - 1, std::max({v0.x, v1.x, v2.x}));
    const int y0 = std::max(0, std::min({v0.y, v1.y, v2.y}));
    const int y1 = std::min(h - 1, std::max({v0.y, v1.y, v2.y}));
    for (int py = y0; py <= y1; ++py) {
      for (int px = x0; px <= x1; ++px) {
        const std::int64_t w0 = edge(v1, v2, px, py);
        const std::int64_t w1 = edge(v2, v0, px, py);
        const std::int64_t w2 = edge(v0, v1, px, py);
        if (w0 < 0 || w1 < 0 || w2 < 0) continue;
        const double sum = static_cast<double>(w0 + w1 + w2);
        if (sum <= 0) continue;
        const double q =
            (w0 * v0.inv_depth + w1 * v1.inv_depth + w2 * v2.inv_depth) / sum;
        const int i = py * w + px;
        log_depth[i] = -std::log(q);
        coverage.set(i, true);
      }
    }
  }

  // Vertices reproduce the input exactly, independent of rounding above.
  for (const auto& v : tri.vertices) {
    const int i = v.y * w + v.x;
    log_depth[i] = sparse.log_depth[i];
    coverage.set(i, true);
  }
  return {std::move(log_depth), std::move(coverage)};
}

ImageGrid normalize_scale(const ImageGrid& log_depth,
                          const ValidityMask& coverage, double target_mean) {
  if (!coverage.same_shape(log_depth)) {
    throw ShapeError("coverage/grid dimension mismatch");
  }
  double sum = 0.0;
  int n = 0;
  for (int i = 0; i < log_depth.size(); ++i) {
    if (coverage.is_valid(i)) {
      sum += log_depth[i];
      ++n;
    }
  }
  if (n == 0) throw EmptyCoverage("normalize_scale over empty coverage");
  const double shift = target_mean - sum / n;
  ImageGrid out = log_depth;
  for (double& v : out.values) v += shift;
  return out;
}

ImageGrid nearest_fill(const ImageGrid& values, const ValidityMask& valid) {
  if (!valid.same_shape(values)) throw ShapeError("mask/grid mismatch");
  const int w = values.width, h = values.height;
  ImageGrid out = values;
  std::vector<std::uint8_t> seen(values.size(), 0);
  std::deque<int> queue;
  for (int i = 0; i < values.size(); ++i) {
    if (valid.is_valid(i)) {
      seen[i] = 1;
      queue.push_back(i);
    }
  }
  if (queue.empty()) throw EmptyCoverage("nearest_fill with no valid pixel");
  while (!queue.empty()) {
    const int i = queue.front();
    queue.pop_front();
    const int x = i % w, y = i / w;
    const int nbrs[4] = {x > 0 ? i - 1 : -1, x + 1 < w ? i + 1 : -1,
                         y > 0 ? i - w : -1, y + 1 < h ? i + w : -1};
    for (int k : nbrs) {
      if (k < 0 || seen[k]) continue;
      seen[k] = 1;
      out[k] = out[i];
      queue.push_back(k);
    }
  }
  return out;
}

ImageGrid densify_full(const SparseDepthMap& sparse) {
  try {
    const Triangulation tri = triangulate(sparse);
    auto [log_depth, coverage] = interpolate(tri, sparse);
    return nearest_fill(log_depth, coverage);
  } catch (const TooFewPoints&) {
    if (sparse.mask.count() == 0) throw;
    return nearest_fill(sparse.log_depth, sparse.mask);
  }
}

}  // namespace dfuse
