#pragma once

// Built-in example scenes and their brute-force oracle values.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "regdom/asymptotics.hpp"
#include "regdom/scene.hpp"

namespace regdom {

struct GalleryOptions {
  double w = 1.0;                   // weight of the single-geodesic wall
  double enumeration_radius = 8.5;  // octagon: pruning radius of the word enumeration
  double wall_radius = 6.0;         // octagon: keep walls within this distance of the origin
  double core_radius = 4.5;         // octagon: region where the truncation is complete
  int word_ball = 4;
};

inline std::vector<std::string> gallery_names() {
  return {"cone", "single-geodesic-2d", "two-geodesics-2d", "quad-spine-3d", "octagon-multicurve-2d"};
}

namespace detail {

inline GroupSection<2> octagon_section(const GalleryOptions& o) {
  GroupSection<2> g;
  g.presentation = builtin_octagon_group();
  g.word_ball = o.word_ball;
  g.core_radius = o.core_radius;
  g.enumeration_radius = o.enumeration_radius;
  g.builtin = "octagon";
  return g;
}

// Ideal endpoint angles of the geodesic of H^2 with unit normal v.
inline std::array<double, 2> endpoint_angles(const MinkVector<2>& v) {
  const Eigen::Vector2d s(v[1], v[2]);
  const double q = s.squaredNorm();
  const Eigen::Vector2d base = v[0] * s / q;
  const Eigen::Vector2d perp = std::sqrt(std::max(0.0, q - v[0] * v[0])) / q * Eigen::Vector2d(-s[1], s[0]);
  const Eigen::Vector2d a = base + perp, b = base - perp;
  return {std::atan2(a[1], a[0]), std::atan2(b[1], b[0])};
}

inline int ideal_side(const MinkVector<2>& v, double angle) {
  const MinkVector<2> u(1.0, std::cos(angle), std::sin(angle));
  return inner<2>(u, v) > 0 ? 1 : -1;
}

// Complementary regions of pairwise disjoint geodesics. Cutting the circle
// at a point off all endpoints turns each geodesic into an arc interval; the
// intervals nest, and each region is the inside of one interval minus its
// children, or the outside of all top-level intervals.
inline std::vector<TopPiece<2>> chord_regions(const std::vector<Wall<2>>& walls) {
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<std::array<double, 2>> ends;
  for (const auto& w : walls) ends.push_back(endpoint_angles(w.normal));
  // Cut in the middle of the widest gap between endpoints.
  std::vector<double> all;
  for (const auto& e : ends) {
    all.push_back(wrap_angle(e[0]));
    all.push_back(wrap_angle(e[1]));
  }
  double cut = 0.0;
  if (!all.empty()) {
    std::sort(all.begin(), all.end());
    double gap = all.front() + two_pi - all.back();
    cut = wrap_angle(all.back() + 0.5 * gap);
    for (std::size_t i = 0; i + 1 < all.size(); ++i)
      if (all[i + 1] - all[i] > gap) {
        gap = all[i + 1] - all[i];
        cut = all[i] + 0.5 * gap;
      }
  }
  struct Interval {
    double lo, hi;
    std::size_t wall;
  };
  std::vector<Interval> iv;
  for (std::size_t i = 0; i < walls.size(); ++i) {
    double a = wrap_angle(ends[i][0] - cut), b = wrap_angle(ends[i][1] - cut);
    if (a > b) std::swap(a, b);
    iv.push_back({a, b, i});
  }
  std::sort(iv.begin(), iv.end(), [](const Interval& l, const Interval& r) { return l.lo < r.lo || (l.lo == r.lo && l.hi > r.hi); });
  std::vector<std::ptrdiff_t> parent(walls.size(), -1);
  std::vector<double> hi_of(walls.size());
  for (const auto& it : iv) hi_of[it.wall] = it.hi;
  std::vector<std::size_t> stack;
  for (const auto& it : iv) {
    while (!stack.empty() && hi_of[stack.back()] < it.lo) stack.pop_back();
    if (!stack.empty()) parent[it.wall] = static_cast<std::ptrdiff_t>(stack.back());
    stack.push_back(it.wall);
  }
  std::vector<double> mid(walls.size());
  for (const auto& it : iv) mid[it.wall] = cut + 0.5 * (it.lo + it.hi);
  std::vector<TopPiece<2>> out;
  TopPiece<2> root{"R", {}, {}};
  std::vector<TopPiece<2>> inside(walls.size());
  for (std::size_t i = 0; i < walls.size(); ++i) {
    inside[i].id = "D_" + walls[i].id;
    inside[i].bounding.emplace_back(walls[i].id, ideal_side(walls[i].normal, mid[i]));
  }
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const std::pair<std::string, int> outer{walls[i].id, -ideal_side(walls[i].normal, mid[i])};
    if (parent[i] < 0) root.bounding.push_back(outer);
    else inside[static_cast<std::size_t>(parent[i])].bounding.push_back(outer);
  }
  out.push_back(std::move(root));
  for (auto& p : inside) out.push_back(std::move(p));
  return out;
}

}  // namespace detail

inline Scene<2> cone_scene(const GalleryOptions& o = {}) {
  Scene<2> sc;
  sc.name = "cone";
  sc.pieces.push_back({"H", {}, {}});
  sc.base_piece = "H";
  sc.group = detail::octagon_section(o);
  return sc;
}

inline Scene<2> single_geodesic_scene(const GalleryOptions& o = {}) {
  Scene<2> sc;
  sc.name = "single-geodesic-2d";
  sc.walls.push_back({"g", unit<2>(2), {}, {}, {}});
  sc.pieces.push_back({"minus", {{"g", -1}}, {}});
  sc.pieces.push_back({"plus", {{"g", 1}}, {}});
  sc.weights["g"] = o.w;
  sc.base_piece = "minus";
  return sc;
}

inline Scene<2> two_geodesics_scene(const GalleryOptions& = {}) {
  Scene<2> sc;
  sc.name = "two-geodesics-2d";
  const double d = 0.75;
  sc.walls.push_back({"g1", MinkVector<2>(std::sinh(d), 0.0, std::cosh(d)), {}, {}, {}});
  sc.walls.push_back({"g2", MinkVector<2>(std::sinh(d), 0.0, -std::cosh(d)), {}, {}, {}});
  sc.pieces.push_back({"top", {{"g1", 1}}, {}});
  sc.pieces.push_back({"middle", {{"g1", -1}, {"g2", -1}}, {}});
  sc.pieces.push_back({"bottom", {{"g2", 1}}, {}});
  sc.weights = {{"g1", 1.0}, {"g2", 0.5}};
  sc.base_piece = "middle";
  return sc;
}

inline Scene<3> quad_spine_scene(const GalleryOptions& = {}) {
  Scene<3> sc;
  sc.name = "quad-spine-3d";
  const NullDirection<3> u1(MinkVector<3>(1, 1, 0, 0)), u2(MinkVector<3>(1, -1, 0, 0));
  const MinkVector<3> e2 = unit<3>(2), e3 = unit<3>(3);
  sc.walls = {{"P1", e2, {u1, u2}, {{e3, -1}}, {}},
              {"P2", e3, {u1, u2}, {{e2, 1}}, {}},
              {"P3", e2, {u1, u2}, {{e3, 1}}, {}},
              {"P4", e3, {u1, u2}, {{e2, -1}}, {}}};
  sc.pieces = {{"D1", {{"P1", -1}, {"P4", -1}}, {}},
               {"D2", {{"P1", 1}, {"P2", -1}}, {}},
               {"D3", {{"P2", 1}, {"P3", 1}}, {}},
               {"D4", {{"P3", -1}, {"P4", 1}}, {}}};
  sc.spines = {{"l", u1, u2, {"D1", "D2", "D3", "D4"}, {"P1", "P2", "P3", "P4"}}};
  sc.weights = {{"P1", 1.0}, {"P2", 2.0}, {"P3", 1.0}, {"P4", 2.0}};
  sc.base_piece = "D1";
  return sc;
}

/// The orbit of the axis of the first octagon generator (a simple closed
/// curve on the surface), truncated to the walls within wall_radius of the
/// origin, all with weight 1. The group cocycle is the one realised by the
/// resulting domain.
inline Scene<2> octagon_scene(const GalleryOptions& o = {}) {
  Scene<2> sc;
  sc.name = "octagon-multicurve-2d";
  sc.group = detail::octagon_section(o);
  const auto& P = sc.group->presentation;
  const auto elems = enumerate_elements(P, 1000, o.enumeration_radius);
  std::vector<MinkVector<2>> normals;
  const double sinh_keep = std::sinh(o.wall_radius);
  for (const auto& e : elems) {
    MinkVector<2> v = e.linear * unit<2>(2);
    v /= std::sqrt(norm2<2>(v));
    if (std::abs(v[0]) > sinh_keep) continue;
    // Canonical sign: first clearly nonzero spatial entry positive.
    const double lead = std::abs(v[1]) > 1e-9 ? v[1] : v[2];
    if (lead < 0) v = -v;
    bool dup = false;
    for (const auto& u : normals) dup = dup || (u - v).cwiseAbs().maxCoeff() < 1e-7 * std::max(1.0, v.cwiseAbs().maxCoeff());
    if (!dup) normals.push_back(v);
  }
  std::sort(normals.begin(), normals.end(), [](const MinkVector<2>& a, const MinkVector<2>& b) {
    const double da = std::abs(a[0]), db = std::abs(b[0]);
    if (std::abs(da - db) > 1e-9) return da < db;
    return std::atan2(a[2], a[1]) < std::atan2(b[2], b[1]);
  });
  for (std::size_t i = 0; i < normals.size(); ++i) {
    Wall<2> w{"c" + std::to_string(i), normals[i], {}, {}, {}};
    sc.walls.push_back(w);
    sc.weights[w.id] = 1.0;
  }
  sc.pieces = detail::chord_regions(sc.walls);
  const StratComplex<2> s = sc.complex();
  const Location base = locate(s, HyperboloidPoint<2>::from_spatial(SpatialVector<2>(0.05, 0.13)).vec());
  sc.base_piece = s.pieces()[base.index].id;
  const auto d = build_domain(s, weights_from_map(s, sc.weights), base.index);
  for (std::size_t k = 0; k < P.generators.size(); ++k) sc.group->presentation.cocycle[k] = domain_cocycle(d, P.generators[k]);
  return sc;
}

/// Any gallery scene by name.
inline AnyScene gallery_scene(const std::string& name, const GalleryOptions& o = {}) {
  if (name == "cone") return cone_scene(o);
  if (name == "single-geodesic-2d") return single_geodesic_scene(o);
  if (name == "two-geodesics-2d") return two_geodesics_scene(o);
  if (name == "quad-spine-3d") return quad_spine_scene(o);
  if (name == "octagon-multicurve-2d") return octagon_scene(o);
  throw ValidationError("unknown gallery scene '" + name + "'");
}

// ---------------------------------------------------------------------------
// Brute-force oracles. They share only the vertex positions with the library.

namespace detail {

// Dense samples of Sigma: vertices, edges and faces.
template <int N>
std::vector<MinkVector<N>> sigma_samples(const RegularDomain<N>& d, int per_edge, int face_grid) {
  const auto& s = d.complex();
  std::vector<MinkVector<N>> out(d.vertex_positions());
  for (std::size_t w = 0; w < s.walls().size(); ++w) {
    const auto& wp = s.wall_pieces(w);
    const MinkVector<N> p = d.rho_of_piece(static_cast<std::size_t>(wp[0])), q = d.rho_of_piece(static_cast<std::size_t>(wp[1]));
    for (int i = 1; i < per_edge; ++i) out.push_back(p + (static_cast<double>(i) / per_edge) * (q - p));
  }
  for (std::size_t k = 0; k < s.spines().size(); ++k) {
    const auto& f = s.spine_frame(k);
    const std::size_t m = f.piece_idx.size();
    const MinkVector<N> c = d.rho_of_piece(f.piece_idx[0]);
    // Fan triangles from vertex 0, sampled barycentrically.
    for (std::size_t i = 1; i + 1 < m; ++i) {
      const MinkVector<N> b = d.rho_of_piece(f.piece_idx[i]), e = d.rho_of_piece(f.piece_idx[i + 1]);
      for (int u = 0; u <= face_grid; ++u)
        for (int v = 0; u + v <= face_grid; ++v)
          out.push_back(c + (static_cast<double>(u) / face_grid) * (b - c) + (static_cast<double>(v) / face_grid) * (e - c));
    }
  }
  return out;
}

template <int N>
std::vector<SpatialVector<N>> dense_sphere(std::size_t count) {
  return sphere_points<N>(count, 0.0);
}

}  // namespace detail

/// T by maximising the Lorentzian distance to dense samples of Sigma.
template <int N>
double oracle_ct(const std::vector<MinkVector<N>>& sigma, const MinkVector<N>& p) {
  double best = -1.0;
  for (const auto& r : sigma) {
    const MinkVector<N> d = p - r;
    if (d[0] <= 0) continue;
    best = std::max(best, -norm2<N>(d));
  }
  return best > 0 ? std::sqrt(best) : 0.0;
}

/// psi by dense sampling of the null support planes of every piece.
template <int N>
double oracle_psi(const RegularDomain<N>& d, const std::vector<SpatialVector<N>>& dirs, const SpatialVector<N>& y) {
  const auto& s = d.complex();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < s.pieces().size(); ++p) {
    const MinkVector<N>& r = d.rho_of_piece(p);
    const SpatialVector<N> rs = r.template tail<N>();
    std::vector<SpatialVector<N>> cand(dirs);
    if constexpr (N == 2) {
      // The extreme admissible directions are the ideal ends of the walls:
      // unit w with v0 = w . (v1, v2).
      for (const auto& b : s.piece_bounds(p)) {
        const MinkVector<N>& v = s.walls()[b.wall].normal;
        const Eigen::Vector2d vs(v[1], v[2]);
        const double c = v[0] / vs.squaredNorm(), h = std::sqrt(std::max(0.0, 1.0 - v[0] * v[0] / vs.squaredNorm()));
        const Eigen::Vector2d perp(-vs[1] / vs.norm(), vs[0] / vs.norm());
        cand.push_back(c * vs + h * perp);
        cand.push_back(c * vs - h * perp);
      }
    }
    for (const auto& w : cand) {
      MinkVector<N> u;
      u[0] = 1.0;
      u.template tail<N>() = w;
      bool in = true;
      for (const auto& b : s.piece_bounds(p)) in = in && b.side * inner<N>(u, s.walls()[b.wall].normal) >= -1e-9;
      if (in) best = std::max(best, r[0] + (y - rs).dot(w));
    }
  }
  return best;
}

/// Deterministic oracle table for a scene: CT values at level points, psi
/// values, and refined Sigma distances between vertex pairs.
template <int N>
json compute_oracles(const Scene<N>& sc) {
  const auto d = sc.domain();
  const auto& s = d.complex();
  json out;
  out["method"] = "grid maximization over Sigma, dense support sampling, refined Dijkstra";
  const auto sig = detail::sigma_samples(d, 4000, 120);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const double reach = sc.group ? 1.2 : 1.5;
  json ct = json::array();
  for (int i = 0; i < 8; ++i) {
    SpatialVector<N> y;
    for (int k = 0; k < N; ++k) y[k] = reach * U(rng);
    const MinkVector<N> x = HyperboloidPoint<N>::from_spatial(y).vec();
    if (locate(s, x).kind != CellKind::piece) continue;
    const double a = 0.25 + 0.5 * (U(rng) + 1.0);
    // The point itself is built from rho; the oracle recomputes T from Sigma.
    const MinkVector<N> p = d.rho_at(x) + a * x;
    ct.push_back({{"point", detail::write_vector<N>(p)}, {"T", oracle_ct<N>(sig, p)}});
  }
  out["ct"] = ct;
  const auto dirs = detail::dense_sphere<N>(N == 2 ? 200000 : 400000);
  json psi = json::array();
  for (int i = 0; i < 6; ++i) {
    SpatialVector<N> y;
    for (int k = 0; k < N; ++k) y[k] = 2.0 * U(rng);
    json yy = json::array();
    for (int k = 0; k < N; ++k) yy.push_back(y[k]);
    psi.push_back({{"y", yy}, {"psi", oracle_psi<N>(d, dirs, y)}});
  }
  out["psi"] = psi;
  json sigma = json::array();
  if (s.pieces().size() >= 2) {
    const SigmaMetric<N> fine(d, 0.01);
    const std::size_t np = std::min<std::size_t>(s.pieces().size(), 6);
    for (std::size_t i = 0; i < np; ++i)
      for (std::size_t j = i + 1; j < np; ++j)
        sigma.push_back({{"from", s.pieces()[i].id},
                         {"to", s.pieces()[j].id},
                         {"d", fine.distance(snap_to_sigma(d, d.rho_of_piece(i)), snap_to_sigma(d, d.rho_of_piece(j)))}});
  }
  out["sigma"] = sigma;
  return out;
}

inline void regen_oracles(AnyScene& sc) {
  std::visit([](auto& s) { s.oracles = compute_oracles(s); }, sc);
}

}  // namespace regdom
