#pragma once

// The simplicial transverse measure: each wall carries the atom a(P) v(P);
// integrating along a path from the base piece gives rho.

#include <algorithm>
#include <queue>
#include <string>
#include <vector>

#include "regdom/stratification.hpp"

namespace regdom {

/// a(P) times the unit normal of P pointing away from from_piece.
template <int N>
MinkVector<N> wall_atom(const StratComplex<N>& s, const WeightFamily& a, std::size_t wall, std::size_t from_piece) {
  for (const auto& b : s.piece_bounds(from_piece))
    if (b.wall == wall) return -b.side * a.a[wall] * s.walls()[wall].normal;
  throw ValidationError("wall '" + s.walls()[wall].id + "' does not bound piece '" + s.pieces()[from_piece].id + "'");
}

template <int N>
MinkVector<N> wall_atom(const StratComplex<N>& s, const WeightFamily& a, const std::string& wall,
                        const std::string& from_piece) {
  return wall_atom(s, a, s.wall_index(wall), s.piece_index(from_piece));
}

template <int N>
struct PathAtom {
  double t;          // segment index + local parameter in [0, 1]
  CellKind kind;     // wall or spine
  std::size_t index;
  MinkVector<N> vector;
};

template <int N>
struct PathMeasure {
  std::vector<PathAtom<N>> atoms;
  MinkVector<N> total = MinkVector<N>::Zero();
};

namespace detail {

// Sector of the spine star containing the plane angle phi.
template <int N>
std::size_t spine_sector(const SpineFrame<N>& f, double phi) {
  const std::size_t k = f.wall_angle.size();
  for (std::size_t i = 0; i < k; ++i) {
    const double lo = f.wall_angle[(i + k - 1) % k];
    if (wrap_angle(phi - lo) < f.alpha[i]) return i;
  }
  return 0;
}

// sum_{m=i}^{j-1} a_m v_m counter-clockwise from sector i to sector j.
template <int N>
MinkVector<N> sector_sum(const SpineFrame<N>& f, const WeightFamily& a, std::size_t i, std::size_t j) {
  const std::size_t k = f.wall_idx.size();
  MinkVector<N> sum = MinkVector<N>::Zero();
  for (std::size_t m = i; m != j; m = (m + 1) % k) sum += a.a[f.wall_idx[m]] * f.crossing[m];
  return sum;
}

}  // namespace detail

/// Atoms of the measure along a polyline of hyperboloid points joined by
/// geodesic segments. Crossings through a spine contribute the sector sum.
template <int N>
PathMeasure<N> path_measure(const StratComplex<N>& s, const WeightFamily& a, const std::vector<MinkVector<N>>& poly,
                            double eps = tol::locate) {
  PathMeasure<N> pm;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Location loc = locate(s, poly[i], eps);
    if (loc.kind != CellKind::piece)
      throw ValidationError("polyline vertex " + std::to_string(i) + " lies on the stratum");
  }
  for (std::size_t seg = 0; seg + 1 < poly.size(); ++seg) {
    const MinkVector<N>& x = poly[seg];
    const MinkVector<N>& y = poly[seg + 1];
    const double len = hyp_distance<N>(x, y);
    std::vector<PathAtom<N>> atoms;
    std::vector<bool> spine_done(s.spines().size(), false);
    for (std::size_t w = 0; w < s.walls().size(); ++w) {
      const auto& wall = s.walls()[w];
      const double A = inner<N>(x, wall.normal), B = inner<N>(y, wall.normal);
      if (!((A < 0 && B > 0) || (A > 0 && B < 0))) continue;
      MinkVector<N> z = B * x - A * y;
      if (z[0] < 0) z = -z;
      z /= std::sqrt(-norm2<N>(z));
      double worst = std::numeric_limits<double>::infinity();
      for (const auto& h : wall.bounds) worst = std::min(worst, h.value(z));
      if (worst < -eps) continue;  // carrier crossed outside the wall
      const double t = seg + (len > 0 ? hyp_distance<N>(x, z) / len : 0.0);
      if (worst > eps) {
        const int side = A > 0 ? 1 : -1;
        atoms.push_back({t, CellKind::wall, w, -side * a.a[w] * wall.normal});
        continue;
      }
      bool resolved = false;
      if constexpr (N == 3) {
        for (std::size_t k = 0; k < s.spines().size(); ++k) {
          const auto& f = s.spine_frame(k);
          if (!f.ok() || std::find(f.wall_idx.begin(), f.wall_idx.end(), w) == f.wall_idx.end()) continue;
          if (!s.on_spine(k, z, 1e3 * eps)) continue;
          resolved = true;
          if (spine_done[k]) break;
          spine_done[k] = true;
          const Eigen::Vector2d cx = f.coords(x), cy = f.coords(y);
          const std::size_t i0 = detail::spine_sector(f, std::atan2(cx[1], cx[0]));
          const std::size_t j0 = detail::spine_sector(f, std::atan2(cy[1], cy[0]));
          if (i0 != j0) atoms.push_back({t, CellKind::spine, k, detail::sector_sum(f, a, i0, j0)});
          break;
        }
      }
      if (!resolved)
        throw NumericError("segment " + std::to_string(seg) + " crosses wall '" + wall.id +
                           "' at its relative boundary; perturb the path");
    }
    std::sort(atoms.begin(), atoms.end(), [](const auto& l, const auto& r) { return l.t < r.t; });
    for (auto& at : atoms) {
      pm.total += at.vector;
      pm.atoms.push_back(std::move(at));
    }
  }
  return pm;
}

/// rho of every top piece by breadth-first search from the base piece, with
/// the largest disagreement found on non-tree dual edges.
template <int N>
struct PiecePositions {
  std::vector<MinkVector<N>> rho;
  double cycle_residual = 0.0;
  std::string worst_wall;
};

template <int N>
PiecePositions<N> piece_positions(const StratComplex<N>& s, const WeightFamily& a, std::size_t base,
                                  const MinkVector<N>& offset = MinkVector<N>::Zero()) {
  PiecePositions<N> out;
  const std::size_t np = s.pieces().size();
  out.rho.assign(np, MinkVector<N>::Zero());
  std::vector<bool> seen(np, false);
  std::queue<std::size_t> bfs;
  out.rho[base] = offset;
  seen[base] = true;
  bfs.push(base);
  while (!bfs.empty()) {
    const std::size_t p = bfs.front();
    bfs.pop();
    for (auto [w, q] : s.neighbours(p)) {
      const MinkVector<N> r = out.rho[p] + wall_atom(s, a, w, p);
      if (!seen[q]) {
        seen[q] = true;
        out.rho[q] = r;
        bfs.push(q);
      } else {
        const double gap = (out.rho[q] - r).cwiseAbs().maxCoeff();
        if (gap > out.cycle_residual) {
          out.cycle_residual = gap;
          out.worst_wall = s.walls()[w].id;
        }
      }
    }
  }
  for (std::size_t p = 0; p < np; ++p)
    if (!seen[p]) throw ValidationError("dual graph is disconnected: piece '" + s.pieces()[p].id + "' unreachable");
  return out;
}

/// rho(x) relative to the base piece. Refuses points on the stratum, where
/// rho is two-valued.
template <int N>
MinkVector<N> rho(const StratComplex<N>& s, const WeightFamily& a, const MinkVector<N>& x, std::size_t base) {
  const Location loc = locate(s, x);
  if (loc.kind != CellKind::piece) throw ValidationError("rho is undefined on the stratum (point lies on a " + std::string(to_string(loc.kind)) + ")");
  const auto path = s.dual_path(base, loc.index);
  if (!path) throw ValidationError("dual graph is disconnected");
  MinkVector<N> r = MinkVector<N>::Zero();
  for (const auto& step : *path) r += -step.side * a.a[step.wall] * s.walls()[step.wall].normal;
  return r;
}

}  // namespace regdom
