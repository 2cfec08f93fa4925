#pragma once

// Bowyer-Watson Delaunay triangulation of a planar point set.

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace regdom::detail {

inline std::vector<std::array<int, 3>> delaunay(const std::vector<Eigen::Vector2d>& pts) {
  std::vector<std::array<int, 3>> out;
  const int n = static_cast<int>(pts.size());
  if (n < 3) return out;
  Eigen::Vector2d lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double span = std::max((hi - lo).maxCoeff(), 1e-12);
  const Eigen::Vector2d mid = 0.5 * (lo + hi);
  std::vector<Eigen::Vector2d> v(pts);
  v.push_back(mid + Eigen::Vector2d(-20 * span, -10 * span));
  v.push_back(mid + Eigen::Vector2d(20 * span, -10 * span));
  v.push_back(mid + Eigen::Vector2d(0, 20 * span));

  struct Tri {
    std::array<int, 3> v;
    Eigen::Vector2d c;
    double r2;
  };
  auto make = [&](int a, int b, int c) {
    const Eigen::Vector2d A = v[a], B = v[b], C = v[c];
    const double d = 2 * (A[0] * (B[1] - C[1]) + B[0] * (C[1] - A[1]) + C[0] * (A[1] - B[1]));
    Tri t{{a, b, c}, Eigen::Vector2d::Zero(), std::numeric_limits<double>::infinity()};
    if (std::abs(d) > 1e-300) {
      const double a2 = A.squaredNorm(), b2 = B.squaredNorm(), c2 = C.squaredNorm();
      t.c = Eigen::Vector2d((a2 * (B[1] - C[1]) + b2 * (C[1] - A[1]) + c2 * (A[1] - B[1])) / d,
                            (a2 * (C[0] - B[0]) + b2 * (A[0] - C[0]) + c2 * (B[0] - A[0])) / d);
      t.r2 = (A - t.c).squaredNorm();
    }
    return t;
  };
  std::vector<Tri> tris{make(n, n + 1, n + 2)};
  std::vector<std::array<int, 2>> boundary;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d& p = v[i];
    boundary.clear();
    std::vector<Tri> keep;
    keep.reserve(tris.size());
    std::vector<std::array<int, 2>> edges;
    for (const auto& t : tris) {
      if ((p - t.c).squaredNorm() < t.r2 * (1 + 1e-12)) {
        for (int k = 0; k < 3; ++k) edges.push_back({t.v[k], t.v[(k + 1) % 3]});
      } else {
        keep.push_back(t);
      }
    }
    // Edges of the cavity appear once.
    for (std::size_t a = 0; a < edges.size(); ++a) {
      bool shared = false;
      for (std::size_t b = 0; b < edges.size() && !shared; ++b)
        shared = a != b && edges[a][0] == edges[b][1] && edges[a][1] == edges[b][0];
      if (!shared) boundary.push_back(edges[a]);
    }
    tris = std::move(keep);
    for (const auto& e : boundary) tris.push_back(make(e[0], e[1], i));
  }
  for (const auto& t : tris) {
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
    const Eigen::Vector2d e1 = v[t.v[1]] - v[t.v[0]], e2 = v[t.v[2]] - v[t.v[0]];
    const double area = 0.5 * (e1[0] * e2[1] - e1[1] * e2[0]);
    if (std::abs(area) < 1e-14 * span * span) continue;
    if (area > 0) out.push_back(t.v);
    else out.push_back({t.v[0], t.v[2], t.v[1]});
  }
  return out;
}

}  // namespace regdom::detail
