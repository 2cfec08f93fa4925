#pragma once

// Level surfaces S_a = {T = a}, their intrinsic distances, the comparison
// with hyperbolic and singularity distances, and marked length spectra.
//
// S_a decomposes into regions r + a x with r in a singularity cell C and x in
// the dual stratum piece; each region carries the product metric
// |dr|^2 + a^2 |dx|^2. Straight paths inside a closed region therefore have
// length sqrt(a^2 d_H(x1, x2)^2 + |r1 - r2|^2).

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "regdom/detail/delaunay.hpp"
#include "regdom/holonomy.hpp"
#include "regdom/parallel.hpp"
#include "regdom/singularity.hpp"

namespace regdom {

template <int N>
struct LevelMesh {
  double a = 1.0;
  double h = 0.1;
  double window = 0.0;                      // hyperbolic radius of the Gauss-image window
  std::vector<MinkVector<N>> points;        // on S_a
  std::vector<MinkVector<N>> gauss;         // N(point)
  std::vector<MinkVector<N>> retraction;    // r(point)
  std::vector<CellKind> kind;               // region type of the generating sample
  std::vector<std::size_t> region;          // piece, wall or spine index
  std::vector<std::array<int, 3>> triangles;  // n = 2 only
  std::vector<std::pair<int, int>> edges;
  std::vector<double> edge_length;
  std::vector<std::vector<int>> piece_vertices;  // vertices lying in each closed piece region

  std::size_t size() const { return points.size(); }

  std::vector<std::vector<std::pair<int, double>>> adjacency() const {
    std::vector<std::vector<std::pair<int, double>>> adj(points.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
      adj[edges[e].first].emplace_back(edges[e].second, edge_length[e]);
      adj[edges[e].second].emplace_back(edges[e].first, edge_length[e]);
    }
    return adj;
  }
};

namespace detail {

template <int N>
double region_length(double a, const MinkVector<N>& x1, const MinkVector<N>& r1, const MinkVector<N>& x2,
                     const MinkVector<N>& r2) {
  const double dh = hyp_distance<N>(x1, x2);
  const MinkVector<N> dr = r1 - r2;
  return std::sqrt(a * a * dh * dh + std::max(0.0, norm2<N>(dr)));
}

/// Geodesic z(t) = cosh t m + sinh t d.
template <int N>
struct GeoLine {
  MinkVector<N> m, d;
  MinkVector<N> at(double t) const { return std::cosh(t) * m + std::sinh(t) * d; }
  MinkVector<N> tangent(double t) const { return std::sinh(t) * m + std::cosh(t) * d; }
  double param(const MinkVector<N>& z) const { return std::asinh(inner<N>(z, d)); }
};

/// The wall of H^2 with normal v, parametrised from its point nearest the origin.
inline GeoLine<2> wall_line(const MinkVector<2>& v) {
  const MinkVector<2> e0 = unit<2>(0);
  MinkVector<2> m = e0 - inner<2>(e0, v) * v;
  m /= std::sqrt(-norm2<2>(m));
  Eigen::Vector3d c = Eigen::Vector3d(m).cross(Eigen::Vector3d(v));
  MinkVector<2> d(-c[0], c[1], c[2]);
  d /= std::sqrt(norm2<2>(d));
  return {m, d};
}

/// The geodesic with ideal endpoints u1, u2 (v0 = 1), from its point nearest the origin.
template <int N>
GeoLine<N> null_line(const MinkVector<N>& u1, const MinkVector<N>& u2) {
  MinkVector<N> m = u1 + u2;
  m /= std::sqrt(-norm2<N>(m));
  MinkVector<N> d = u1 - u2;
  d /= std::sqrt(norm2<N>(d));
  return {m, d};
}

// a * d_H(p(t), q(s)) with derivatives; p or q may be fixed.
struct PairTerm {
  double f, ft, fs, ftt, fss, fts;
};

template <int N>
PairTerm pair_term(double a, const MinkVector<N>& p, const MinkVector<N>& dp, const MinkVector<N>& q,
                   const MinkVector<N>& dq) {
  const double c = -inner<N>(p, q);
  const double dist = 2.0 * std::asinh(0.5 * std::sqrt(std::max(0.0, norm2<N>(MinkVector<N>(p - q)))));
  const double sh = std::sinh(dist);
  PairTerm t{a * dist, 0, 0, 0, 0, 0};
  if (sh < 1e-150) return t;
  const double ct = -inner<N>(dp, q), cs = -inner<N>(p, dq), cts = -inner<N>(dp, dq);
  const double sh3 = sh * sh * sh;
  t.ft = a * ct / sh;
  t.fs = a * cs / sh;
  t.ftt = a * (c / sh - c * ct * ct / sh3);
  t.fss = a * (c / sh - c * cs * cs / sh3);
  t.fts = a * (cts / sh - c * ct * cs / sh3);
  return t;
}

}  // namespace detail

/// Exact intrinsic distance on S_a for n = 2. The shortest path visits the
/// pieces and bands of the walls separating x and y, in tree order; its
/// length is a convex function of the entry and exit points on each wall,
/// minimised by damped Newton. Every evaluated value is the length of an
/// actual path, so the result is also an upper bound.
struct ShortestPath2 {
  double length = 0.0;
  std::size_t crossings = 0;
  int iterations = 0;
  bool converged = true;
  std::vector<double> params;  // entry, exit per wall
};

inline ShortestPath2 level_shortest_path(const RegularDomain<2>& d, double a, const MinkVector<2>& x,
                                         const MinkVector<2>& y) {
  const auto& s = d.complex();
  const Location lx = locate(s, x), ly = locate(s, y);
  if (lx.kind != CellKind::piece || ly.kind != CellKind::piece)
    throw ValidationError("intrinsic_distance: endpoints must lie off the stratum");
  const auto path = s.dual_path(lx.index, ly.index);
  if (!path) throw ValidationError("dual graph is disconnected");
  ShortestPath2 out;
  const std::size_t k = path->size();
  out.crossings = k;
  if (k == 0) {
    out.length = a * hyp_distance<2>(x, y);
    return out;
  }
  std::vector<detail::GeoLine<2>> lines;
  std::vector<double> w;
  for (const auto& st : *path) {
    lines.push_back(detail::wall_line(s.walls()[st.wall].normal));
    w.push_back(d.weights().a[st.wall]);
  }
  const int nv = static_cast<int>(2 * k);
  Eigen::VectorXd u(nv);
  for (std::size_t i = 0; i < k; ++i) {
    const MinkVector<2>& v = s.walls()[(*path)[i].wall].normal;
    const double A = inner<2>(x, v), B = inner<2>(y, v);
    MinkVector<2> z = B * x - A * y;
    if (z[0] < 0) z = -z;
    double t = 0.0;
    if (norm2<2>(z) < 0) t = lines[i].param(z / std::sqrt(-norm2<2>(z)));
    u[2 * i] = u[2 * i + 1] = t;
  }
  const MinkVector<2> zero = MinkVector<2>::Zero();
  auto eval = [&](const Eigen::VectorXd& v, Eigen::VectorXd* g, Eigen::MatrixXd* H) {
    double f = 0.0;
    if (g) g->setZero(nv);
    if (H) H->setZero(nv, nv);
    auto add_pair = [&](int it, int is, const MinkVector<2>& p, const MinkVector<2>& dp, const MinkVector<2>& q,
                        const MinkVector<2>& dq) {
      const auto t = detail::pair_term<2>(a, p, dp, q, dq);
      f += t.f;
      if (g) {
        if (it >= 0) (*g)[it] += t.ft;
        if (is >= 0) (*g)[is] += t.fs;
      }
      if (H) {
        if (it >= 0) (*H)(it, it) += t.ftt;
        if (is >= 0) (*H)(is, is) += t.fss;
        if (it >= 0 && is >= 0) {
          (*H)(it, is) += t.fts;
          (*H)(is, it) += t.fts;
        }
      }
    };
    add_pair(-1, 0, x, zero, lines[0].at(v[0]), lines[0].tangent(v[0]));
    for (std::size_t i = 0; i < k; ++i) {
      const int is = static_cast<int>(2 * i), ie = is + 1;
      const double du = v[ie] - v[is];
      const double b = std::sqrt(a * a * du * du + w[i] * w[i]);
      f += b;
      if (g) {
        (*g)[ie] += a * a * du / b;
        (*g)[is] -= a * a * du / b;
      }
      if (H) {
        const double h2 = a * a * w[i] * w[i] / (b * b * b);
        (*H)(is, is) += h2;
        (*H)(ie, ie) += h2;
        (*H)(is, ie) -= h2;
        (*H)(ie, is) -= h2;
      }
      if (i + 1 < k)
        add_pair(ie, ie + 1, lines[i].at(v[ie]), lines[i].tangent(v[ie]), lines[i + 1].at(v[ie + 1]),
                 lines[i + 1].tangent(v[ie + 1]));
    }
    add_pair(nv - 1, -1, lines[k - 1].at(v[nv - 1]), lines[k - 1].tangent(v[nv - 1]), y, zero);
    return f;
  };
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
  double f = eval(u, &g, &H);
  out.converged = false;
  for (int it = 0; it < 200; ++it) {
    out.iterations = it + 1;
    const double scale = std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
    Eigen::VectorXd step;
    double lambda = 0.0;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(H + lambda * Eigen::MatrixXd::Identity(nv, nv));
      if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0).all()) {
        step = -ldlt.solve(g);
        break;
      }
      lambda = lambda == 0.0 ? 1e-10 * scale : 10 * lambda;
    }
    if (step.size() == 0) step = -g / scale;
    const double decrement = -g.dot(step);
    if (decrement < 1e-24 * std::max(1.0, f) || step.cwiseAbs().maxCoeff() < 1e-14) {
      out.converged = true;
      break;
    }
    double alpha = 1.0;
    Eigen::VectorXd trial;
    double ft = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      trial = u + alpha * step;
      ft = eval(trial, nullptr, nullptr);
      if (ft <= f - 1e-4 * alpha * decrement) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      out.converged = decrement < 1e-18 * std::max(1.0, f);
      break;
    }
    u = trial;
    f = eval(u, &g, &H);
  }
  out.length = f;
  out.params.assign(u.data(), u.data() + u.size());
  return out;
}

namespace detail {

// Evenly spread unit vectors: one ring point set per dimension.
template <int N>
std::vector<SpatialVector<N>> sphere_points(std::size_t count, double offset) {
  std::vector<SpatialVector<N>> out;
  if constexpr (N == 2) {
    for (std::size_t i = 0; i < count; ++i) {
      const double th = 2.0 * std::numbers::pi * (static_cast<double>(i) + offset) / static_cast<double>(count);
      out.emplace_back(std::cos(th), std::sin(th));
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = (static_cast<double>(i) + offset) * std::numbers::pi * (3.0 - std::sqrt(5.0));
      out.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
  }
  return out;
}

// Gauss points of a hyperbolic ball of radius R with spacing about h.
template <int N>
std::vector<MinkVector<N>> ball_samples(double R, double h) {
  std::vector<MinkVector<N>> out{unit<N>(0)};
  for (int k = 1; k * h <= R + 1e-12; ++k) {
    const double r = k * h;
    const double shell = N == 2 ? 2.0 * std::numbers::pi * std::sinh(r) / h
                                : 4.0 * std::numbers::pi * std::sinh(r) * std::sinh(r) / (h * h);
    const auto dirs = sphere_points<N>(static_cast<std::size_t>(std::ceil(shell)), 0.5 * (k % 2));
    for (const auto& w : dirs) out.push_back(HyperboloidPoint<N>::polar(r, w).vec());
  }
  return out;
}

}  // namespace detail

/// Samples the level surface S_a over the Gauss-image window of radius
/// `window` about the origin, region by region: pieces rho + a x, wall bands
/// rho_- + t v + a z and (n = 3) spine regions r + a z with r in the face.
template <int N>
LevelMesh<N> level_mesh(const RegularDomain<N>& d, double a, double h, double window) {
  if (!(a > 0) || !(h > 0) || !(window > 0)) throw ValidationError("level_mesh: a, h and window must be positive");
  const auto& s = d.complex();
  LevelMesh<N> mesh;
  mesh.a = a;
  mesh.h = h;
  mesh.window = window;
  mesh.piece_vertices.assign(s.pieces().size(), {});
  const double cosh_r = std::cosh(window);
  const double margin = std::sinh(0.3 * h);

  // Vertices of each closed region (for edge generation).
  std::vector<std::vector<int>> band_vertices(s.walls().size()), spine_vertices(s.spines().size());

  auto add = [&](const MinkVector<N>& r, const MinkVector<N>& x, CellKind kind, std::size_t region) {
    mesh.points.push_back(r + a * x);
    mesh.gauss.push_back(x);
    mesh.retraction.push_back(r);
    mesh.kind.push_back(kind);
    mesh.region.push_back(region);
    return static_cast<int>(mesh.points.size() - 1);
  };
  auto band_steps = [&](double wgt) { return std::clamp(static_cast<int>(std::ceil(wgt / (a * h))), 1, 20); };

  // Piece interiors.
  for (const auto& x : detail::ball_samples<N>(window, h)) {
    const Location loc = locate(s, x);
    if (loc.kind != CellKind::piece) continue;
    if (s.piece_slack(loc.index, x) < margin) continue;
    const int id = add(d.rho_of_piece(loc.index), x, CellKind::piece, loc.index);
    mesh.piece_vertices[loc.index].push_back(id);
  }

  // Wall samples and bands. Columns are indexed by (sample, step).
  struct Column {
    MinkVector<N> z;
    double t;          // wall parameter (n = 2)
    std::vector<int> ids;
  };
  std::vector<std::vector<Column>> columns(s.walls().size());
  for (std::size_t w = 0; w < s.walls().size(); ++w) {
    const auto& wp = s.wall_pieces(w);
    if (wp[0] < 0 || wp[1] < 0) continue;
    const auto pm = static_cast<std::size_t>(wp[0]), pp = static_cast<std::size_t>(wp[1]);
    const double wgt = d.weights().a[w];
    const MinkVector<N> v = s.walls()[w].normal;
    std::vector<std::pair<MinkVector<N>, double>> zs;
    if constexpr (N == 2) {
      const auto line = detail::wall_line(v);
      if (line.m[0] > cosh_r) continue;
      const double tmax = std::acosh(cosh_r / line.m[0]);
      const int m = static_cast<int>(std::floor(tmax / h));
      for (int j = -m; j <= m; ++j) zs.emplace_back(line.at(j * h), j * h);
    } else {
      // Polar grid on the carrier about its point nearest the origin.
      const MinkVector<N> e0 = unit<N>(0);
      MinkVector<N> m = e0 - inner<N>(e0, v) * v;
      m /= std::sqrt(-norm2<N>(m));
      if (m[0] > cosh_r) continue;
      Eigen::Matrix<double, N + 1, 2> tb;
      int found = 0;
      for (int i = 1; i <= N && found < 2; ++i) {
        MinkVector<N> t = unit<N>(i);
        t -= inner<N>(t, v) * v;
        t += inner<N>(t, m) * m;
        for (int j = 0; j < found; ++j) t -= inner<N>(t, tb.col(j)) * MinkVector<N>(tb.col(j));
        const double q = norm2<N>(t);
        if (q > 1e-6) tb.col(found++) = t / std::sqrt(q);
      }
      const double R = std::acosh(std::max(1.0, cosh_r)) + std::acosh(m[0]);
      std::vector<MinkVector<N>> cand{m};
      for (int k = 1; k * h <= R; ++k) {
        const double r = k * h;
        const int cnt = static_cast<int>(std::ceil(2.0 * std::numbers::pi * std::sinh(r) / h));
        for (int i = 0; i < cnt; ++i) {
          const double phi = 2.0 * std::numbers::pi * (i + 0.5 * (k % 2)) / cnt;
          cand.push_back(std::cosh(r) * m + std::sinh(r) * (std::cos(phi) * tb.col(0) + std::sin(phi) * tb.col(1)));
        }
      }
      for (const auto& z : cand) {
        if (z[0] > cosh_r) continue;
        bool ok = true;
        for (const auto& hs : s.walls()[w].bounds) ok = ok && hs.value(z) >= margin;
        if (ok) zs.emplace_back(z, 0.0);
      }
    }
    const int steps = band_steps(wgt);
    const MinkVector<N> r0 = d.rho_of_piece(pm), r1 = d.rho_of_piece(pp);
    for (const auto& [z, t] : zs) {
      Column c{z, t, {}};
      for (int k = 0; k <= steps; ++k) {
        const double f = static_cast<double>(k) / steps;
        const MinkVector<N> r = (1.0 - f) * r0 + f * r1;
        const CellKind kind = k == 0 || k == steps ? CellKind::piece : CellKind::wall;
        const std::size_t reg = k == 0 ? pm : (k == steps ? pp : w);
        const int id = add(r, z, kind, reg);
        c.ids.push_back(id);
        band_vertices[w].push_back(id);
      }
      mesh.piece_vertices[pm].push_back(c.ids.front());
      mesh.piece_vertices[pp].push_back(c.ids.back());
      columns[w].push_back(std::move(c));
    }
  }

  auto add_edge = [&](int i, int j) {
    if (i == j) return;
    mesh.edges.emplace_back(i, j);
    mesh.edge_length.push_back(detail::region_length<N>(a, mesh.gauss[i], mesh.retraction[i], mesh.gauss[j], mesh.retraction[j]));
  };

  if constexpr (N == 2) {
    // Pieces are convex, so straight in the Klein model: triangulate there.
    for (std::size_t p = 0; p < s.pieces().size(); ++p) {
      const auto& ids = mesh.piece_vertices[p];
      if (ids.size() < 3) {
        for (std::size_t i = 0; i < ids.size(); ++i)
          for (std::size_t j = i + 1; j < ids.size(); ++j) add_edge(ids[i], ids[j]);
        continue;
      }
      std::vector<Eigen::Vector2d> klein;
      for (int id : ids) klein.emplace_back(mesh.gauss[id][1] / mesh.gauss[id][0], mesh.gauss[id][2] / mesh.gauss[id][0]);
      for (const auto& t : detail::delaunay(klein)) {
        mesh.triangles.push_back({ids[t[0]], ids[t[1]], ids[t[2]]});
        for (int e = 0; e < 3; ++e)
          if (ids[t[e]] < ids[t[(e + 1) % 3]]) add_edge(ids[t[e]], ids[t[(e + 1) % 3]]);
          else {
            // Keep each undirected edge once; its twin is added from the other triangle or below.
          }
      }
    }
    // Boundary edges of piece triangulations seen only in one orientation.
    {
      std::vector<std::pair<int, int>> seen(mesh.edges);
      for (auto& e : seen)
        if (e.first > e.second) std::swap(e.first, e.second);
      std::sort(seen.begin(), seen.end());
      std::vector<std::pair<int, int>> extra;
      for (const auto& t : mesh.triangles)
        for (int e = 0; e < 3; ++e) {
          std::pair<int, int> ed{std::min(t[e], t[(e + 1) % 3]), std::max(t[e], t[(e + 1) % 3])};
          if (!std::binary_search(seen.begin(), seen.end(), ed)) extra.push_back(ed);
        }
      std::sort(extra.begin(), extra.end());
      extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
      for (auto [i, j] : extra) add_edge(i, j);
    }
    // Pieces are convex, so vertices a few hops apart in a piece are joined
    // by exact geodesic edges; this removes most of the graph stretch.
    {
      std::vector<std::vector<int>> nb(mesh.size());
      for (const auto& [i, j] : mesh.edges) {
        if (mesh.kind[i] != CellKind::piece || mesh.kind[j] != CellKind::piece || mesh.region[i] != mesh.region[j]) continue;
        nb[i].push_back(j);
        nb[j].push_back(i);
      }
      for (int i = 0; i < static_cast<int>(mesh.size()); ++i) {
        if (nb[i].empty()) continue;
        std::vector<int> ring(nb[i]), reach(nb[i]);
        for (int hop = 2; hop <= 3; ++hop) {
          std::vector<int> next;
          for (int u : ring)
            for (int v : nb[u]) next.push_back(v);
          std::sort(next.begin(), next.end());
          next.erase(std::unique(next.begin(), next.end()), next.end());
          ring.clear();
          for (int v : next)
            if (v != i && std::find(reach.begin(), reach.end(), v) == reach.end()) {
              ring.push_back(v);
              reach.push_back(v);
            }
          for (int v : ring)
            if (i < v) add_edge(i, v);
        }
      }
    }
    // Bands: structured grid over (wall parameter, step).
    for (std::size_t w = 0; w < columns.size(); ++w) {
      const auto& cols = columns[w];
      for (std::size_t j = 0; j < cols.size(); ++j) {
        const auto& c = cols[j];
        for (std::size_t k = 0; k + 1 < c.ids.size(); ++k) add_edge(c.ids[k], c.ids[k + 1]);
        if (j + 1 == cols.size()) continue;
        const auto& c2 = cols[j + 1];
        for (std::size_t k = 0; k + 1 < c.ids.size(); ++k) {
          mesh.triangles.push_back({c.ids[k], c2.ids[k], c2.ids[k + 1]});
          mesh.triangles.push_back({c.ids[k], c2.ids[k + 1], c.ids[k + 1]});
        }
        // The band is a flat strip, so any two of its points are joined by
        // an exact straight edge; link all steps of nearby columns.
        for (std::size_t dj = 1; dj <= 2 && j + dj < cols.size(); ++dj)
          for (std::size_t k = 0; k < c.ids.size(); ++k)
            for (std::size_t k2 = 0; k2 < c.ids.size(); ++k2) {
              if (dj == 1 && (k == k2) && (k == 0 || k + 1 == c.ids.size())) continue;  // piece edges
              add_edge(c.ids[k], cols[j + dj].ids[k2]);
            }
      }
    }
  } else {
    // Spine regions l x F: spine points times face samples.
    for (std::size_t k = 0; k < s.spines().size(); ++k) {
      const auto& f = s.spine_frame(k);
      const auto& cell = d.cells()[d.face_cell(k)];
      const auto line = detail::null_line<N>(s.spines()[k].u1.vec(), s.spines()[k].u2.vec());
      if (line.m[0] > cosh_r) continue;
      const double tmax = std::acosh(cosh_r / line.m[0]);
      const std::size_t m = f.piece_idx.size();
      // Face samples: polygon vertices, edge points, interior grid.
      std::vector<std::pair<MinkVector<N>, std::vector<std::size_t>>> face;  // retraction point, adjacent pieces / walls tags
      std::vector<MinkVector<N>> fpts;
      std::vector<int> ftag;  // >= 0 vertex i, < 0: -(edge i + 1), sentinel interior
      const int interior = std::numeric_limits<int>::min();
      double hf = a * h;
      for (std::size_t i = 0; i < m; ++i) {
        const MinkVector<N> p0 = d.rho_of_piece(f.piece_idx[i]);
        const MinkVector<N> p1 = d.rho_of_piece(f.piece_idx[(i + 1) % m]);
        fpts.push_back(p0);
        ftag.push_back(static_cast<int>(i));
        const double len = std::sqrt(std::max(0.0, norm2<N>(MinkVector<N>(p1 - p0))));
        const int cnt = std::clamp(static_cast<int>(std::ceil(len / hf)), 1, 20);
        for (int j = 1; j < cnt; ++j) {
          fpts.push_back(p0 + (static_cast<double>(j) / cnt) * (p1 - p0));
          ftag.push_back(-static_cast<int>(i) - 1);
        }
      }
      {
        double lmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) lmin = std::min(lmin, d.weights().a[f.wall_idx[i]]);
        const double step = std::max(hf, lmin / 20.0);
        Eigen::Vector2d lo = cell.polygon[0], hi = cell.polygon[0];
        for (const auto& q : cell.polygon) {
          lo = lo.cwiseMin(q);
          hi = hi.cwiseMax(q);
        }
        for (double u0 = lo[0] + step; u0 < hi[0] - 0.3 * step; u0 += step)
          for (double u1 = lo[1] + step; u1 < hi[1] - 0.3 * step; u1 += step) {
            const Eigen::Vector2d q(u0, u1);
            if ((detail::project_polygon(q, cell.polygon) - q).norm() > 0) continue;
            bool far = true;
            const std::size_t np = cell.polygon.size();
            for (std::size_t e = 0; e < np && far; ++e)
              far = (detail::project_segment(q, cell.polygon[e], cell.polygon[(e + 1) % np]) - q).norm() > 0.3 * step;
            if (!far) continue;
            fpts.push_back(cell.point(q));
            ftag.push_back(interior);
          }
      }
      const int ms = static_cast<int>(std::floor(tmax / h));
      for (int j = -ms; j <= ms; ++j) {
        const MinkVector<N> z = line.at(j * h);
        for (std::size_t q = 0; q < fpts.size(); ++q) {
          const int id = add(fpts[q], z, CellKind::spine, k);
          spine_vertices[k].push_back(id);
          if (ftag[q] >= 0) {
            const std::size_t i = static_cast<std::size_t>(ftag[q]);
            mesh.piece_vertices[f.piece_idx[i]].push_back(id);
            band_vertices[f.wall_idx[i]].push_back(id);
            band_vertices[f.wall_idx[(i + m - 1) % m]].push_back(id);
          } else if (ftag[q] != interior) {
            band_vertices[f.wall_idx[static_cast<std::size_t>(-ftag[q] - 1)]].push_back(id);
          }
        }
      }
      (void)face;
    }
    // Connect vertices sharing a closed region within a few sample spacings.
    auto connect = [&](const std::vector<int>& ids, double radius) {
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
          const int p = ids[i], q = ids[j];
          const double dh = hyp_distance<N>(mesh.gauss[p], mesh.gauss[q]);
          if (dh > radius * h) continue;
          const double dr = std::sqrt(std::max(0.0, norm2<N>(MinkVector<N>(mesh.retraction[p] - mesh.retraction[q]))));
          if (dh * dh / (h * h) + dr * dr / std::max(1e-300, a * a * h * h) > radius * radius && dr > 0.05 * (dr + a * dh) + 1e-12) {
            // Long steps across a band or face are kept only when mostly
            // transverse; they are exact straight segments in the region.
            if (dh > h * 1.01) continue;
          }
          add_edge(p, q);
        }
    };
    for (const auto& ids : mesh.piece_vertices) connect(ids, 2.6);
    for (const auto& ids : band_vertices) connect(ids, 2.6);
    for (const auto& ids : spine_vertices) connect(ids, 2.6);
  }
  return mesh;
}

/// Default window: covers the given Gauss points with a margin.
template <int N>
double window_for(const std::vector<MinkVector<N>>& xs, double h) {
  double r = 0.0;
  for (const auto& x : xs) r = std::max(r, std::acosh(std::max(1.0, x[0])));
  return r + 2.0 * h + 0.25;
}

struct DistanceResult {
  double value = 0.0;
  double mesh_bound = std::numeric_limits<double>::infinity();
  double h = 0.0;
  std::size_t crossings = 0;
  bool exact = false;
};

/// Dijkstra on the mesh between the level points of x and y; the endpoints
/// are joined to nearby vertices of their piece regions.
template <int N>
double mesh_distance(const RegularDomain<N>& d, const LevelMesh<N>& mesh,
                     const std::vector<std::vector<std::pair<int, double>>>& adj, const MinkVector<N>& x,
                     const MinkVector<N>& y) {
  const auto& s = d.complex();
  for (const auto* p : {&x, &y})
    if (hyp_distance<N>(*p, unit<N>(0)) > mesh.window)
      throw ValidationError("intrinsic_distance: endpoint outside the meshed window");
  const Location lx = locate(s, x), ly = locate(s, y);
  if (lx.kind != CellKind::piece || ly.kind != CellKind::piece)
    throw ValidationError("intrinsic_distance: endpoints must lie off the stratum");
  const double a = mesh.a;
  auto attach = [&](const MinkVector<N>& p, std::size_t piece) {
    std::vector<std::pair<double, int>> cand;
    for (int id : mesh.piece_vertices[piece]) cand.emplace_back(hyp_distance<N>(p, mesh.gauss[id]), id);
    const std::size_t keep = std::min<std::size_t>(cand.size(), 16);
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep), cand.end());
    cand.resize(keep);
    std::vector<std::pair<int, double>> out;
    const MinkVector<N>& r = d.rho_of_piece(piece);
    for (auto [dh, id] : cand) out.emplace_back(id, detail::region_length<N>(a, p, r, mesh.gauss[id], mesh.retraction[id]));
    return out;
  };
  double best = std::numeric_limits<double>::infinity();
  if (lx.index == ly.index) best = a * hyp_distance<N>(x, y);
  const auto src = attach(x, lx.index), dst = attach(y, ly.index);
  std::vector<double> dist(mesh.size(), std::numeric_limits<double>::infinity());
  std::vector<double> exit(mesh.size(), std::numeric_limits<double>::infinity());
  for (auto [id, c] : dst) exit[id] = std::min(exit[id], c);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (auto [id, c] : src)
    if (c < dist[id]) {
      dist[id] = c;
      pq.emplace(c, id);
    }
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (du > dist[u] || du >= best) continue;
    if (std::isfinite(exit[u])) best = std::min(best, du + exit[u]);
    for (auto [v, w] : adj[u])
      if (du + w < dist[v]) {
        dist[v] = du + w;
        pq.emplace(dist[v], v);
      }
  }
  return best;
}

/// Intrinsic distance on S_a between level_point(a, x) and level_point(a, y).
/// The mesh gives a Dijkstra upper bound; for n = 2 the exact shortest path
/// through the tree of regions is also computed and the smaller value wins.
template <int N>
DistanceResult intrinsic_distance(const RegularDomain<N>& d, const LevelMesh<N>& mesh,
                                  const std::vector<std::vector<std::pair<int, double>>>& adj, const MinkVector<N>& x,
                                  const MinkVector<N>& y) {
  DistanceResult out;
  out.h = mesh.h;
  out.mesh_bound = mesh_distance(d, mesh, adj, x, y);
  out.value = out.mesh_bound;
  if constexpr (N == 2) {
    const auto sp = level_shortest_path(d, mesh.a, x, y);
    out.crossings = sp.crossings;
    out.exact = sp.converged;
    out.value = std::min(out.value, sp.length);
  }
  return out;
}

template <int N>
DistanceResult intrinsic_distance(const RegularDomain<N>& d, double a, const MinkVector<N>& x, const MinkVector<N>& y,
                                  double h) {
  if (locate(d.complex(), x).kind != CellKind::piece || locate(d.complex(), y).kind != CellKind::piece)
    throw ValidationError("intrinsic_distance: endpoints must lie off the stratum");
  if ((x - y).cwiseAbs().maxCoeff() == 0.0) {
    DistanceResult z;
    z.h = h;
    z.exact = true;
    z.mesh_bound = 0.0;
    return z;
  }
  const auto mesh = level_mesh(d, a, h, window_for<N>({x, y}, h));
  return intrinsic_distance(d, mesh, mesh.adjacency(), x, y);
}

/// Exact level distance for n = 2 without a mesh.
inline DistanceResult intrinsic_distance_exact(const RegularDomain<2>& d, double a, const MinkVector<2>& x,
                                               const MinkVector<2>& y) {
  const auto sp = level_shortest_path(d, a, x, y);
  DistanceResult out;
  out.value = sp.length;
  out.crossings = sp.crossings;
  out.exact = sp.converged;
  return out;
}

struct ConvergenceRow {
  std::size_t pair = 0;
  double a = 0.0;
  double d_a = 0.0;
  double d_a_over_a = 0.0;
  double d_h = 0.0;
  double d_sigma = 0.0;
  double h = 0.0;
  double budget = 0.03;
  double mesh_bound = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::vector<std::string> violations;  // sandwich failures beyond the budget
};

/// d_a, d_a/a, d_H and d_Sigma(rho(x), rho(y)) for every pair and level, with
/// the monotone sandwich d_a <= d_b, d_H <= d_b/b <= d_a/a (a < b) checked
/// within the relative budget.
template <int N>
ConvergenceReport convergence_report(const RegularDomain<N>& d,
                                     const std::vector<std::pair<MinkVector<N>, MinkVector<N>>>& pairs,
                                     std::vector<double> a_list, double h, double budget = 0.03, bool use_mesh = true) {
  std::sort(a_list.begin(), a_list.end());
  ConvergenceReport rep;
  std::vector<MinkVector<N>> pts;
  for (const auto& [x, y] : pairs) {
    pts.push_back(x);
    pts.push_back(y);
  }
  const SigmaMetric<N> sigma(d, h);
  std::vector<double> dsig(pairs.size()), dh(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    dh[i] = hyp_distance<N>(pairs[i].first, pairs[i].second);
    dsig[i] = sigma.distance(snap_to_sigma(d, d.rho_at(pairs[i].first)), snap_to_sigma(d, d.rho_at(pairs[i].second)));
  }
  std::vector<std::vector<ConvergenceRow>> table(a_list.size(), std::vector<ConvergenceRow>(pairs.size()));
  for (std::size_t ia = 0; ia < a_list.size(); ++ia) {
    const double a = a_list[ia];
    LevelMesh<N> mesh;
    std::vector<std::vector<std::pair<int, double>>> adj;
    const bool mesh_on = use_mesh || N != 2;
    if (mesh_on) {
      mesh = level_mesh(d, a, h, window_for<N>(pts, h));
      adj = mesh.adjacency();
    }
    parallel_for(pairs.size(), [&](std::size_t i) {
      DistanceResult r;
      if (mesh_on) {
        r = intrinsic_distance(d, mesh, adj, pairs[i].first, pairs[i].second);
      } else {
        if constexpr (N == 2) r = intrinsic_distance_exact(d, a, pairs[i].first, pairs[i].second);
      }
      ConvergenceRow row;
      row.pair = i;
      row.a = a;
      row.d_a = r.value;
      row.d_a_over_a = r.value / a;
      row.d_h = dh[i];
      row.d_sigma = dsig[i];
      row.h = h;
      row.budget = budget;
      row.mesh_bound = r.mesh_bound;
      table[ia][i] = row;
    });
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t ia = 0; ia < a_list.size(); ++ia) {
      rep.rows.push_back(table[ia][i]);
      const auto& r = table[ia][i];
      if (r.d_h > r.d_a_over_a * (1 + budget) + 1e-12) {
        std::ostringstream os;
        os << "pair " << i << ": d_H > d_a/a at a=" << r.a;
        rep.violations.push_back(os.str());
      }
      if (ia == 0) continue;
      const auto& lo = table[ia - 1][i];
      if (lo.d_a > r.d_a * (1 + budget) + 1e-12) {
        std::ostringstream os;
        os << "pair " << i << ": d_a decreases from a=" << lo.a << " to a=" << r.a;
        rep.violations.push_back(os.str());
      }
      if (r.d_a_over_a > lo.d_a_over_a * (1 + budget) + 1e-12) {
        std::ostringstream os;
        os << "pair " << i << ": d_a/a increases from a=" << lo.a << " to a=" << r.a;
        rep.violations.push_back(os.str());
      }
    }
  }
  return rep;
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceReport& rep) {
  os << "pair,a,d_a,d_a_over_a,d_H,d_sigma,h,budget\n";
  os << std::setprecision(17);
  for (const auto& r : rep.rows)
    os << r.pair << ',' << r.a << ',' << r.d_a << ',' << r.d_a_over_a << ',' << r.d_h << ',' << r.d_sigma << ',' << r.h
       << ',' << r.budget << '\n';
}

/// OBJ export of the mesh (n = 2: triangles; n = 3: edges as lines). The
/// ambient coordinates are written in order (x1, .., xn, x0).
template <int N>
void write_obj(std::ostream& os, const LevelMesh<N>& mesh) {
  os << std::setprecision(17);
  os << "# level surface a=" << mesh.a << " h=" << mesh.h << "\n";
  for (const auto& p : mesh.points) {
    os << 'v';
    for (int i = 1; i <= N; ++i) os << ' ' << p[i];
    if constexpr (N == 2) os << ' ' << p[0];
    os << '\n';
  }
  if (!mesh.triangles.empty()) {
    for (const auto& t : mesh.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  } else {
    for (const auto& [i, j] : mesh.edges) os << "l " << i + 1 << ' ' << j + 1 << '\n';
  }
}

struct SpectrumEntry {
  Word word;
  double ell_hyp = 0.0;
  double ell_sigma = 0.0;
  std::vector<std::pair<double, double>> ell_a;  // (a, ell_a)
  std::size_t samples = 0;
};

/// Marked length spectrum of gamma_tau on the level surfaces and on Sigma,
/// as sampled minima (upper bounds). Samples lie half on the axis of gamma
/// over one period and half at random in the core, with x and gamma x both
/// inside the core ball.
template <int N>
SpectrumEntry spectrum(const RegularDomain<N>& d, const GroupPresentation<N>& P, const Word& word,
                       const std::vector<double>& a_list, std::size_t samples, double core_radius, double h = 0.05,
                       std::uint64_t seed = 1) {
  SpectrumEntry out;
  out.word = reduce_word(word);
  const auto g = P.evaluate(word);
  for (double a : a_list) out.ell_a.emplace_back(a, 0.0);
  const auto info = classify_isometry<N>(g.linear);
  if (info.kind == IsometryClass::hyperbolic) out.ell_hyp = std::log(info.lambda);
  if (out.word.empty()) return out;

  const MinkVector<N> tau = domain_cocycle(d, g.linear);
  const auto& s = d.complex();
  std::vector<MinkVector<N>> xs;
  auto accept = [&](const MinkVector<N>& x) {
    if (hyp_distance<N>(x, unit<N>(0)) > core_radius) return false;
    const MinkVector<N> gx = g.linear * x;
    if (hyp_distance<N>(gx, unit<N>(0)) > core_radius) return false;
    if (locate(s, x).kind != CellKind::piece || locate(s, gx).kind != CellKind::piece) return false;
    xs.push_back(x);
    return true;
  };
  const std::size_t on_axis = info.kind == IsometryClass::hyperbolic ? samples / 2 : 0;
  if (on_axis > 0) {
    const auto line = detail::null_line<N>(info.attracting->vec(), info.repelling->vec());
    const double ell = out.ell_hyp;
    for (std::size_t j = 0; j < on_axis; ++j) {
      const double t = -ell + ell * (static_cast<double>(j) + 0.5) / static_cast<double>(on_axis);
      if (accept(line.at(t))) continue;
      // The axis may lie on a wall: step off it along a unit normal.
      const MinkVector<N> x = line.at(t), tg = line.tangent(t);
      for (int i = 1; i <= N; ++i) {
        MinkVector<N> nrm = unit<N>(i);
        nrm += inner<N>(nrm, x) * x;
        nrm -= inner<N>(nrm, tg) * tg;
        const double q = norm2<N>(nrm);
        if (q < 1e-6) continue;
        nrm /= std::sqrt(q);
        if (accept(MinkVector<N>(std::cosh(1e-6) * x + std::sinh(1e-6) * nrm))) break;
        if (accept(MinkVector<N>(std::cosh(1e-6) * x - std::sinh(1e-6) * nrm))) break;
      }
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (std::size_t tries = 0; xs.size() < samples && tries < 100 * samples; ++tries) {
    SpatialVector<N> y;
    for (int i = 0; i < N; ++i) y[i] = U(rng) * std::sinh(core_radius);
    accept(HyperboloidPoint<N>::from_spatial(y).vec());
  }
  if (xs.empty()) throw ValidationError("spectrum: core region too small for this word");
  out.samples = xs.size();

  const SigmaMetric<N> sigma(d, h);
  out.ell_sigma = std::numeric_limits<double>::infinity();
  for (const auto& x : xs) {
    const MinkVector<N> r = d.rho_at(x);
    const MinkVector<N> gr = g.linear * r + tau;
    // g r + tau cancels large terms; snap relative to their size.
    const double big = (N + 1) * g.linear.cwiseAbs().maxCoeff() * r.cwiseAbs().maxCoeff() + tau.cwiseAbs().maxCoeff();
    out.ell_sigma = std::min(out.ell_sigma, sigma.distance(snap_to_sigma(d, r), snap_to_sigma(d, gr, 1e-9 * std::max(1.0, big))));
  }
  for (auto& [a, ell] : out.ell_a) {
    std::vector<double> vals(xs.size());
    if constexpr (N == 2) {
      parallel_for(xs.size(), [&](std::size_t i) {
        vals[i] = intrinsic_distance_exact(d, a, xs[i], MinkVector<N>(g.linear * xs[i])).value;
      });
    } else {
      std::vector<MinkVector<N>> all(xs);
      for (const auto& x : xs) all.push_back(g.linear * x);
      const auto mesh = level_mesh(d, a, h, window_for<N>(all, h));
      const auto adj = mesh.adjacency();
      for (std::size_t i = 0; i < xs.size(); ++i) vals[i] = mesh_distance(d, mesh, adj, xs[i], MinkVector<N>(g.linear * xs[i]));
    }
    ell = *std::min_element(vals.begin(), vals.end());
  }
  return out;
}

}  // namespace regdom
