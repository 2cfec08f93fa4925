#pragma once

// Future-complete regular domain of a weighted stratification:
//   Omega = intersection over pieces D and ideal points u of D of
//           { p : <p - rho_D, u> < 0 },
// with cosmological time, retraction and normal computed by exact
// maximisation over the singularity cells (vertices rho_D, wall edges and
// spine faces).

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "regdom/holonomy.hpp"
#include "regdom/stratification.hpp"
#include "regdom/transverse_measure.hpp"

namespace regdom {

namespace detail {

inline double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a[0] * b[1] - a[1] * b[0]; }

/// Counter-clockwise convex hull (collinear points dropped).
inline std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]); });
  if (pts.size() < 3) return pts;
  std::vector<Eigen::Vector2d> h(2 * pts.size());
  std::size_t k = 0;
  const double eps = 1e-14;
  for (const auto& p : pts) {
    while (k >= 2 && cross2(h[k - 1] - h[k - 2], p - h[k - 2]) <= eps) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross2(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= eps) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

inline Eigen::Vector2d project_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d d = b - a;
  const double l2 = d.squaredNorm();
  if (l2 == 0) return a;
  return a + std::clamp((p - a).dot(d) / l2, 0.0, 1.0) * d;
}

/// Nearest point of a counter-clockwise convex polygon.
inline Eigen::Vector2d project_polygon(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& poly) {
  const std::size_t k = poly.size();
  if (k == 1) return poly[0];
  if (k == 2) return project_segment(p, poly[0], poly[1]);
  bool inside = true;
  for (std::size_t i = 0; i < k && inside; ++i) inside = cross2(poly[(i + 1) % k] - poly[i], p - poly[i]) >= 0;
  if (inside) return p;
  Eigen::Vector2d best = poly[0];
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    const Eigen::Vector2d q = project_segment(p, poly[i], poly[(i + 1) % k]);
    const double d = (q - p).squaredNorm();
    if (d < bd) { bd = d; best = q; }
  }
  return best;
}

}  // namespace detail

/// A cell of the singularity: vertex (dim 0), wall edge (dim 1) or spine
/// face (dim 2), parametrised as origin + frame * s with a spacelike
/// orthonormal frame.
template <int N>
struct Cell {
  CellKind kind = CellKind::piece;  // piece -> vertex, wall -> edge, spine -> face
  std::size_t source = 0;
  int dim = 0;
  MinkVector<N> origin = MinkVector<N>::Zero();
  Eigen::Matrix<double, N + 1, 2> frame = Eigen::Matrix<double, N + 1, 2>::Zero();
  double length = 0.0;                    // edges
  std::vector<Eigen::Vector2d> polygon;   // faces, counter-clockwise in frame coordinates
  std::vector<std::size_t> face_pieces;   // faces: pieces of the star in order

  MinkVector<N> point(const Eigen::Vector2d& s) const {
    if (dim == 0) return origin;
    if (dim == 1) return origin + s[0] * frame.col(0);
    return origin + frame * s;
  }

  /// Maximiser over the cell of -<p - q, p - q> and the maximum.
  std::pair<Eigen::Vector2d, double> best(const MinkVector<N>& p) const {
    const MinkVector<N> d = p - origin;
    const double dd = norm2<N>(d);
    Eigen::Vector2d s = Eigen::Vector2d::Zero();
    if (dim == 1) {
      s[0] = std::clamp(inner<N>(d, frame.col(0)), 0.0, length);
    } else if (dim == 2) {
      const Eigen::Vector2d b(inner<N>(d, frame.col(0)), inner<N>(d, frame.col(1)));
      s = detail::project_polygon(b, polygon);
    }
    if (dim == 0) return {s, -dd};
    const Eigen::Vector2d b(inner<N>(d, frame.col(0)), dim == 2 ? inner<N>(d, frame.col(1)) : 0.0);
    return {s, -dd + 2.0 * b.dot(s) - s.squaredNorm()};
  }
};

template <int N>
struct CtResult {
  double T = 0.0;
  MinkVector<N> r = MinkVector<N>::Zero();
  MinkVector<N> normal = MinkVector<N>::Zero();  // N(p)
  std::size_t cell = 0;
  CellKind kind = CellKind::piece;
  int cell_dim = 0;
  MinkVector<N> gradient() const { return -normal; }
};

template <int N>
struct Membership {
  bool inside = false;
  bool boundary = false;   // within tol::boundary of a support plane
  double margin = 0.0;     // max over support planes of <p - rho, u> (negative inside)
};

template <int N>
class RegularDomain {
 public:
  static constexpr int dim = N;

  RegularDomain() = default;

  RegularDomain(StratComplex<N> s, WeightFamily a, std::size_t base, std::vector<MinkVector<N>> rho)
      : s_(std::move(s)), a_(std::move(a)), base_(base), rho_(std::move(rho)) {
    assemble_cells();
  }

  const StratComplex<N>& complex() const { return s_; }
  const WeightFamily& weights() const { return a_; }
  std::size_t base() const { return base_; }
  const std::vector<MinkVector<N>>& vertex_positions() const { return rho_; }
  const MinkVector<N>& rho_of_piece(std::size_t p) const { return rho_[p]; }
  const std::vector<Cell<N>>& cells() const { return cells_; }
  double cycle_residual() const { return cycle_residual_; }
  void set_cycle_residual(double r) { cycle_residual_ = r; }

  /// Cell index of the vertex of piece p, the edge of wall w, the face of spine k.
  std::size_t vertex_cell(std::size_t p) const { return p; }
  std::size_t edge_cell(std::size_t w) const { return s_.pieces().size() + w; }
  std::size_t face_cell(std::size_t k) const { return s_.pieces().size() + s_.walls().size() + k; }

  std::string cell_label(std::size_t c) const {
    const auto& cell = cells_[c];
    switch (cell.kind) {
      case CellKind::piece: return "vertex:" + s_.pieces()[cell.source].id;
      case CellKind::wall: return "edge:" + s_.walls()[cell.source].id;
      case CellKind::spine: return "face:" + s_.spines()[cell.source].id;
    }
    return "?";
  }

  /// max over ideal points u of piece p of <q - rho_p, u> with u0 = 1.
  double piece_support(std::size_t p, const MinkVector<N>& q) const {
    const MinkVector<N> d = q - rho_[p];
    const auto mx = s_.ideal_region(p).maximize(d.template tail<N>());
    return mx.empty() ? -std::numeric_limits<double>::infinity() : -d[0] + mx.value;
  }

  Membership<N> membership(const MinkVector<N>& q) const {
    Membership<N> m;
    m.margin = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < rho_.size(); ++p) m.margin = std::max(m.margin, piece_support(p, q));
    const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
    m.inside = m.margin < -1e-12 * scale;
    m.boundary = std::abs(m.margin) <= tol::boundary * scale;
    return m;
  }

  bool contains(const MinkVector<N>& q) const { return membership(q).inside; }

  /// psi(y): the time coordinate of the boundary above the spatial point y.
  double boundary_height(const SpatialVector<N>& y) const {
    double h = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < rho_.size(); ++p) {
      const MinkVector<N>& r = rho_[p];
      const auto mx = s_.ideal_region(p).maximize(y - r.template tail<N>());
      if (!mx.empty()) h = std::max(h, r[0] + mx.value);
    }
    return h;
  }

  /// Cosmological time, retraction and normal at q.
  CtResult<N> ct_query(const MinkVector<N>& q) const {
    double best = 0.0;
    std::ptrdiff_t arg = -1;
    Eigen::Vector2d arg_s = Eigen::Vector2d::Zero();
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      const auto [s, f] = cells_[c].best(q);
      if (!(f > 0)) continue;
      if (arg < 0 || f > best + 1e-12 * std::max(1.0, best)) {
        const MinkVector<N> r = cells_[c].point(s);
        if (!(q[0] - r[0] > 0)) continue;
        best = f;
        arg = static_cast<std::ptrdiff_t>(c);
        arg_s = s;
      }
    }
    if (arg < 0) throw NotInDomainError("point is not in the domain");
    CtResult<N> out;
    out.cell = static_cast<std::size_t>(arg);
    const auto& cell = cells_[out.cell];
    out.kind = cell.kind;
    out.cell_dim = cell.dim;
    out.r = cell.point(arg_s);
    const MinkVector<N> d = q - out.r;
    out.T = std::sqrt(std::max(0.0, -norm2<N>(d)));
    if (!(out.T > 0)) throw NotInDomainError("point is on the boundary of the domain");
    out.normal = d / out.T;
    return out;
  }

  /// T only.
  double cosmological_time(const MinkVector<N>& q) const { return ct_query(q).T; }

  /// rho(x) + a x for x off the stratum.
  MinkVector<N> level_point(double a, const MinkVector<N>& x) const {
    if (!(a > 0)) throw ValidationError("level must be positive");
    const Location loc = locate(s_, x);
    if (loc.kind != CellKind::piece) throw ValidationError("level_point: x lies on the stratum");
    return rho_[loc.index] + a * x;
  }

  /// rho at a point off the stratum.
  const MinkVector<N>& rho_at(const MinkVector<N>& x) const {
    const Location loc = locate(s_, x);
    if (loc.kind != CellKind::piece) throw ValidationError("rho is undefined on the stratum");
    return rho_[loc.index];
  }

  /// Exhibits two non-proportional null support directions.
  bool has_two_null_planes() const {
    std::vector<SpatialVector<N>> dirs;
    for (std::size_t p = 0; p < rho_.size(); ++p) {
      for (int i = 0; i < N; ++i)
        for (double sg : {-1.0, 1.0}) {
          SpatialVector<N> g = SpatialVector<N>::Zero();
          g[i] = sg;
          const auto mx = s_.ideal_region(p).maximize(g);
          if (mx.empty()) continue;
          for (const auto& d : dirs)
            if ((d - mx.argmax).norm() > 1e-9) return true;
          dirs.push_back(mx.argmax);
        }
    }
    return false;
  }

 private:
  void assemble_cells() {
    cells_.clear();
    for (std::size_t p = 0; p < rho_.size(); ++p) {
      Cell<N> c;
      c.kind = CellKind::piece;
      c.source = p;
      c.origin = rho_[p];
      cells_.push_back(c);
    }
    for (std::size_t w = 0; w < s_.walls().size(); ++w) {
      const auto& wp = s_.wall_pieces(w);
      Cell<N> c;
      c.kind = CellKind::wall;
      c.source = w;
      c.dim = 1;
      if (wp[0] >= 0 && wp[1] >= 0) {
        c.origin = rho_[static_cast<std::size_t>(wp[0])];
        const MinkVector<N> e = rho_[static_cast<std::size_t>(wp[1])] - c.origin;
        c.length = std::sqrt(std::max(0.0, norm2<N>(e)));
        c.frame.col(0) = c.length > 0 ? MinkVector<N>(e / c.length) : s_.walls()[w].normal;
      }
      cells_.push_back(c);
    }
    for (std::size_t k = 0; k < s_.spines().size(); ++k) {
      const auto& f = s_.spine_frame(k);
      Cell<N> c;
      c.kind = CellKind::spine;
      c.source = k;
      c.dim = 2;
      c.frame = f.basis;
      c.face_pieces = f.piece_idx;
      if (!f.piece_idx.empty()) {
        c.origin = rho_[f.piece_idx[0]];
        std::vector<Eigen::Vector2d> pts;
        for (std::size_t p : f.piece_idx) pts.push_back(f.coords(rho_[p] - c.origin));
        c.polygon = detail::convex_hull(pts);
        if (c.polygon.empty()) c.polygon.push_back(Eigen::Vector2d::Zero());
      }
      cells_.push_back(c);
    }
  }

  StratComplex<N> s_;
  WeightFamily a_;
  std::size_t base_ = 0;
  std::vector<MinkVector<N>> rho_;
  std::vector<Cell<N>> cells_;
  double cycle_residual_ = 0.0;
};

/// Builds the domain: rho per piece by breadth-first search from the base
/// piece (rho(base) = offset), after checking the spine equations.
template <int N>
RegularDomain<N> build_domain(const StratComplex<N>& s, const WeightFamily& a, std::size_t base,
                              const MinkVector<N>& offset = MinkVector<N>::Zero()) {
  check_weights(s, a);
  std::vector<std::string> bad;
  for (const auto& r : weight_residuals(s, a))
    if (r.residual.norm() > tol::weights) {
      std::ostringstream os;
      os << "spine '" << r.spine << "' weight residual " << r.residual.norm();
      bad.push_back(os.str());
    }
  if (!bad.empty()) throw ValidationError("weights violate the spine equations", bad);
  auto pos = piece_positions(s, a, base, offset);
  const double scale = a.a.empty() ? 1.0 : std::max(1.0, *std::max_element(a.a.begin(), a.a.end()));
  if (pos.cycle_residual > tol::weights * scale)
    throw ValidationError("rho is path dependent around wall '" + pos.worst_wall + "' (residual " +
                          std::to_string(pos.cycle_residual) + ")");
  RegularDomain<N> d(s, a, base, std::move(pos.rho));
  d.set_cycle_residual(pos.cycle_residual);
  return d;
}

/// Image of the domain under p -> L p + o (L in SO+(n,1)).
template <int N>
RegularDomain<N> transform_affine(const RegularDomain<N>& d, const LorentzMatrix<N>& L, const MinkVector<N>& o) {
  const auto& s = d.complex();
  std::vector<Wall<N>> walls;
  for (std::size_t w = 0; w < s.walls().size(); ++w) {
    Wall<N> x = s.walls()[w];
    x.normal = L * x.normal;
    for (auto& u : x.ideal_vertices) u = NullDirection<N>(L * u.vec());
    for (auto& h : x.bounds) h.normal = L * h.normal;
    x.witness = L * s.wall_witness(w);
    walls.push_back(std::move(x));
  }
  std::vector<TopPiece<N>> pieces;
  for (std::size_t p = 0; p < s.pieces().size(); ++p) {
    TopPiece<N> x = s.pieces()[p];
    x.witness = L * s.piece_witness(p);
    pieces.push_back(std::move(x));
  }
  std::vector<SpineGeodesic<N>> spines = s.spines();
  for (auto& sp : spines) {
    sp.u1 = NullDirection<N>(L * sp.u1.vec());
    sp.u2 = NullDirection<N>(L * sp.u2.vec());
  }
  std::vector<MinkVector<N>> rho;
  for (const auto& r : d.vertex_positions()) rho.push_back(L * r + o);
  RegularDomain<N> out(StratComplex<N>(std::move(walls), std::move(pieces), std::move(spines)), d.weights(), d.base(),
                       std::move(rho));
  out.set_cycle_residual(d.cycle_residual());
  return out;
}

template <int N>
RegularDomain<N> translate_domain(const RegularDomain<N>& d, const MinkVector<N>& v) {
  std::vector<MinkVector<N>> rho;
  for (const auto& r : d.vertex_positions()) rho.push_back(r + v);
  return RegularDomain<N>(d.complex(), d.weights(), d.base(), std::move(rho));
}

/// s D: vertices and weights scale by s, so T(s p) = s T(p).
template <int N>
RegularDomain<N> scale_domain(const RegularDomain<N>& d, double s) {
  if (!(s > 0)) throw ValidationError("scale factor must be positive");
  std::vector<MinkVector<N>> rho;
  for (const auto& r : d.vertex_positions()) rho.push_back(s * r);
  WeightFamily a = d.weights();
  for (double& x : a.a) x *= s;
  return RegularDomain<N>(d.complex(), a, d.base(), std::move(rho));
}

/// Translation cocycle realised by the domain on g: rho(g x0) - g rho(x0),
/// with x0 the witness of the base piece.
template <int N>
MinkVector<N> domain_cocycle(const RegularDomain<N>& d, const LorentzMatrix<N>& g) {
  const MinkVector<N>& x0 = d.complex().piece_witness(d.base());
  return d.rho_at(g * x0) - g * d.rho_of_piece(d.base());
}

}  // namespace regdom
