#pragma once

// Simplicial geodesic stratifications of H^n: walls (codimension 1), top
// pieces and, for n = 3, spine geodesics. A piece lies on side s of a bounding
// wall with normal v when s <x, v> >= 0 on the piece.

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "regdom/ideal_region.hpp"
#include "regdom/lorentz.hpp"

namespace regdom {

template <int N>
struct Wall {
  std::string id;
  MinkVector<N> normal;                       // unit spacelike
  std::vector<NullDirection<N>> ideal_vertices;
  std::vector<HalfSpace<N>> bounds;           // extent inside the carrier; empty = whole hyperplane
  std::optional<MinkVector<N>> witness;       // a point of the wall
};

template <int N>
struct TopPiece {
  std::string id;
  std::vector<std::pair<std::string, int>> bounding;  // (wall id, side)
  std::optional<MinkVector<N>> witness;               // interior point
};

/// n = 3 only. star: pieces[i] and walls[i] alternate, walls[i] separating
/// pieces[i] and pieces[i+1 mod k].
template <int N>
struct SpineGeodesic {
  std::string id;
  NullDirection<N> u1, u2;
  std::vector<std::string> pieces;
  std::vector<std::string> walls;
};

struct WallSide {
  std::size_t wall;
  int side;
};

enum class CellKind { piece, wall, spine };

inline const char* to_string(CellKind k) {
  switch (k) {
    case CellKind::piece: return "piece";
    case CellKind::wall: return "wall";
    case CellKind::spine: return "spine";
  }
  return "?";
}

struct Location {
  CellKind kind = CellKind::piece;
  std::size_t index = 0;
  int dim = 0;
};

/// Geometry of a spine star in the spacelike plane orthogonal to the spine.
template <int N>
struct SpineFrame {
  Eigen::Matrix<double, N + 1, 2> basis = Eigen::Matrix<double, N + 1, 2>::Zero();  // (e1, e2), star counter-clockwise
  std::vector<double> wall_angle;          // theta_i of wall i in the plane
  std::vector<double> alpha;               // dihedral angle of piece i
  std::vector<MinkVector<N>> crossing;     // unit normal of wall i, from piece i into piece i+1
  std::vector<std::size_t> piece_idx, wall_idx;
  std::string error;                       // empty when consistent
  bool ok() const { return error.empty(); }

  Eigen::Vector2d coords(const MinkVector<N>& x) const {
    return {inner<N>(x, basis.col(0)), inner<N>(x, basis.col(1))};
  }
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

namespace detail {

// Vector Lorentz-orthogonal to the three columns (n = 3).
inline MinkVector<3> lorentz_cross(const MinkVector<3>& a, const MinkVector<3>& b, const MinkVector<3>& c) {
  Eigen::Matrix<double, 3, 4> m;
  m.row(0) = a.transpose();
  m.row(1) = b.transpose();
  m.row(2) = c.transpose();
  MinkVector<3> w;
  for (int i = 0; i < 4; ++i) {
    Eigen::Matrix3d minor;
    int col = 0;
    for (int j = 0; j < 4; ++j)
      if (j != i) minor.col(col++) = m.col(j);
    w[i] = ((i % 2) ? -1.0 : 1.0) * minor.determinant();
  }
  w[0] = -w[0];  // eta w
  return w;
}

inline double wrap_angle(double t) {
  const double two_pi = 2.0 * std::numbers::pi;
  t = std::fmod(t, two_pi);
  return t < 0 ? t + two_pi : t;
}

}  // namespace detail

/// Bounds of an n = 3 wall given as the ideal hull of >= 3 cyclically ordered
/// vertices on its carrier.
inline std::vector<HalfSpace<3>> wall_bounds_from_vertices(const MinkVector<3>& normal,
                                                          const std::vector<NullDirection<3>>& verts) {
  std::vector<HalfSpace<3>> out;
  const std::size_t k = verts.size();
  if (k < 3) return out;
  MinkVector<3> centroid = MinkVector<3>::Zero();
  for (const auto& v : verts) centroid += v.vec();
  for (std::size_t i = 0; i < k; ++i) {
    MinkVector<3> m = detail::lorentz_cross(verts[i].vec(), verts[(i + 1) % k].vec(), normal);
    const double q = norm2<3>(m);
    if (q <= 0) continue;
    m /= std::sqrt(q);
    out.push_back({m, inner<3>(centroid, m) >= 0 ? 1 : -1});
  }
  return out;
}

template <int N>
class StratComplex {
 public:
  StratComplex() = default;

  StratComplex(std::vector<Wall<N>> walls, std::vector<TopPiece<N>> pieces, std::vector<SpineGeodesic<N>> spines)
      : walls_(std::move(walls)), pieces_(std::move(pieces)), spines_(std::move(spines)) {
    resolve();
  }

  const std::vector<Wall<N>>& walls() const { return walls_; }
  const std::vector<TopPiece<N>>& pieces() const { return pieces_; }
  const std::vector<SpineGeodesic<N>>& spines() const { return spines_; }

  std::size_t wall_index(const std::string& id) const { return lookup(wall_ids_, id, "wall"); }
  std::size_t piece_index(const std::string& id) const { return lookup(piece_ids_, id, "piece"); }
  std::size_t spine_index(const std::string& id) const { return lookup(spine_ids_, id, "spine"); }
  bool has_piece(const std::string& id) const { return piece_ids_.count(id) > 0; }

  const std::vector<WallSide>& piece_bounds(std::size_t p) const { return bounds_[p]; }
  const IdealRegion<N>& ideal_region(std::size_t p) const { return regions_[p]; }
  const MinkVector<N>& piece_witness(std::size_t p) const { return piece_witness_[p]; }
  const MinkVector<N>& wall_witness(std::size_t w) const { return wall_witness_[w]; }
  const SpineFrame<N>& spine_frame(std::size_t s) const { return frames_[s]; }

  /// Pieces on the - and + side of wall w (-1 when missing).
  const std::array<std::ptrdiff_t, 2>& wall_pieces(std::size_t w) const { return wall_pieces_[w]; }

  /// Problems found while resolving references (reported by validate_complex).
  const std::vector<std::string>& issues() const { return issues_; }

  /// Smallest side * <x, v> over the bounding walls of piece p.
  double piece_slack(std::size_t p, const MinkVector<N>& x) const {
    double s = std::numeric_limits<double>::infinity();
    for (const auto& b : bounds_[p]) s = std::min(s, b.side * inner<N>(x, walls_[b.wall].normal));
    return s;
  }

  bool piece_contains(std::size_t p, const MinkVector<N>& x, double eps = 0.0) const {
    return piece_slack(p, x) >= -eps;
  }

  /// x within eps of wall w's carrier and inside its extent.
  bool wall_contains(std::size_t w, const MinkVector<N>& x, double eps = tol::locate) const {
    const auto& wall = walls_[w];
    if (std::abs(inner<N>(x, wall.normal)) > eps) return false;
    for (const auto& h : wall.bounds)
      if (h.value(x) < -eps) return false;
    return true;
  }

  bool on_spine(std::size_t s, const MinkVector<N>& x, double eps = tol::locate) const {
    if constexpr (N != 3) return false;
    const Eigen::Vector2d c = frames_[s].coords(x);
    return std::abs(c[0]) <= eps && std::abs(c[1]) <= eps;
  }

  /// Pieces adjacent across each bounding wall.
  std::vector<std::pair<std::size_t, std::size_t>> neighbours(std::size_t p) const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& b : bounds_[p]) {
      const auto& wp = wall_pieces_[b.wall];
      const std::ptrdiff_t q = b.side < 0 ? wp[1] : wp[0];
      if (q >= 0 && static_cast<std::size_t>(q) != p) out.emplace_back(b.wall, static_cast<std::size_t>(q));
    }
    return out;
  }

  /// Walls crossed along the dual-graph path from piece p to piece q, with the
  /// side of the piece being left (empty if q is unreachable or q == p).
  std::optional<std::vector<WallSide>> dual_path(std::size_t p, std::size_t q) const {
    if (p == q) return std::vector<WallSide>{};
    std::vector<std::ptrdiff_t> parent(pieces_.size(), -1), via(pieces_.size(), -1);
    std::vector<bool> seen(pieces_.size(), false);
    std::queue<std::size_t> bfs;
    bfs.push(p);
    seen[p] = true;
    while (!bfs.empty()) {
      const std::size_t c = bfs.front();
      bfs.pop();
      if (c == q) break;
      for (auto [w, nb] : neighbours(c)) {
        if (seen[nb]) continue;
        seen[nb] = true;
        parent[nb] = static_cast<std::ptrdiff_t>(c);
        via[nb] = static_cast<std::ptrdiff_t>(w);
        bfs.push(nb);
      }
    }
    if (!seen[q]) return std::nullopt;
    std::vector<WallSide> path;
    for (std::size_t c = q; c != p; c = static_cast<std::size_t>(parent[c])) {
      const std::size_t w = static_cast<std::size_t>(via[c]);
      const std::size_t from = static_cast<std::size_t>(parent[c]);
      path.push_back({w, wall_pieces_[w][0] == static_cast<std::ptrdiff_t>(from) ? -1 : 1});
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  /// Support of the piece's ideal region: max over ideal u = (1, omega) of <u, m>.
  double ideal_support(std::size_t p, const MinkVector<N>& m) const {
    const auto mx = regions_[p].maximize(m.template tail<N>());
    return mx.empty() ? -std::numeric_limits<double>::infinity() : -m[0] + mx.value;
  }

 private:
  static std::size_t lookup(const std::map<std::string, std::size_t>& m, const std::string& id, const char* what) {
    auto it = m.find(id);
    if (it == m.end()) throw ValidationError(std::string("unknown ") + what + " id '" + id + "'");
    return it->second;
  }

  void resolve() {
    auto index = [&](auto& items, auto& map, const char* what) {
      for (std::size_t i = 0; i < items.size(); ++i)
        if (!map.emplace(items[i].id, i).second) issues_.push_back(std::string("duplicate ") + what + " id '" + items[i].id + "'");
    };
    index(walls_, wall_ids_, "wall");
    index(pieces_, piece_ids_, "piece");
    index(spines_, spine_ids_, "spine");
    if (N == 2 && !spines_.empty()) issues_.push_back("spines are only meaningful for n = 3");

    for (auto& w : walls_) {
      if constexpr (N == 3) {
        if (w.bounds.empty() && w.ideal_vertices.size() >= 3) w.bounds = wall_bounds_from_vertices(w.normal, w.ideal_vertices);
      }
      if constexpr (N == 2) {
        if (w.ideal_vertices.empty()) {
          auto [a, b] = geodesic_endpoints(w.normal);
          w.ideal_vertices = {a, b};
        }
      }
    }

    wall_pieces_.assign(walls_.size(), {-1, -1});
    bounds_.resize(pieces_.size());
    for (std::size_t p = 0; p < pieces_.size(); ++p) {
      for (const auto& [wid, side] : pieces_[p].bounding) {
        auto it = wall_ids_.find(wid);
        if (it == wall_ids_.end()) {
          issues_.push_back("piece '" + pieces_[p].id + "' references unknown wall '" + wid + "'");
          continue;
        }
        if (side != 1 && side != -1) {
          issues_.push_back("piece '" + pieces_[p].id + "' has side sign " + std::to_string(side) + " on wall '" + wid + "'");
          continue;
        }
        bounds_[p].push_back({it->second, side});
        auto& slot = wall_pieces_[it->second][side > 0 ? 1 : 0];
        if (slot >= 0)
          issues_.push_back("wall '" + wid + "' bounds pieces '" + pieces_[static_cast<std::size_t>(slot)].id + "' and '" +
                            pieces_[p].id + "' on the same side");
        else
          slot = static_cast<std::ptrdiff_t>(p);
      }
    }
    for (std::size_t w = 0; w < walls_.size(); ++w) {
      const auto& wp = wall_pieces_[w];
      const int count = (wp[0] >= 0) + (wp[1] >= 0);
      if (count != 2)
        issues_.push_back("wall '" + walls_[w].id + "' appears in " + std::to_string(count) +
                          " top piece(s); expected two with opposite signs");
    }

    regions_.clear();
    for (std::size_t p = 0; p < pieces_.size(); ++p) {
      std::vector<HalfSpace<N>> hs;
      for (const auto& b : bounds_[p]) hs.push_back({walls_[b.wall].normal, b.side});
      regions_.emplace_back(std::move(hs));
    }

    wall_witness_.resize(walls_.size());
    for (std::size_t w = 0; w < walls_.size(); ++w) wall_witness_[w] = walls_[w].witness ? *walls_[w].witness : find_wall_witness(w);
    piece_witness_.resize(pieces_.size());
    for (std::size_t p = 0; p < pieces_.size(); ++p)
      piece_witness_[p] = pieces_[p].witness ? *pieces_[p].witness : find_piece_witness(p);

    frames_.clear();
    for (std::size_t s = 0; s < spines_.size(); ++s) frames_.push_back(make_frame(s));
  }

  MinkVector<N> find_wall_witness(std::size_t w) const {
    const auto& wall = walls_[w];
    const MinkVector<N>& v = wall.normal;
    const MinkVector<N> e0 = unit<N>(0);
    MinkVector<N> m = e0 - inner<N>(e0, v) * v / norm2<N>(v);  // foot of the origin
    m /= std::sqrt(-norm2<N>(m));
    auto score = [&](const MinkVector<N>& x) {
      double s = std::numeric_limits<double>::infinity();
      for (const auto& h : wall.bounds) s = std::min(s, h.value(x));
      return s;
    };
    if (wall.bounds.empty() || score(m) > 1e-6) return m;
    if constexpr (N == 3) {
      // Orthonormal spacelike directions tangent to the carrier at m.
      Eigen::Matrix<double, 4, 2> t;
      int found = 0;
      for (int i = 1; i <= 3 && found < 2; ++i) {
        MinkVector<3> x = unit<3>(i);
        x -= inner<3>(x, v) * v;
        x += inner<3>(x, m) * m;
        for (int j = 0; j < found; ++j) x -= inner<3>(x, t.col(j)) * MinkVector<3>(t.col(j));
        const double q = norm2<3>(x);
        if (q > 1e-6) t.col(found++) = x / std::sqrt(q);
      }
      MinkVector<3> best = m;
      double best_score = score(m);
      for (double r : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0}) {
        for (int k = 0; k < 72; ++k) {
          const double phi = 2.0 * std::numbers::pi * k / 72.0;
          MinkVector<3> x = std::cosh(r) * m + std::sinh(r) * (std::cos(phi) * t.col(0) + std::sin(phi) * t.col(1));
          const double s = score(x) / x[0];
          if (s > best_score) { best_score = s; best = x; }
        }
      }
      return best;
    }
    return m;
  }

  MinkVector<N> find_piece_witness(std::size_t p) const {
    const MinkVector<N> origin = unit<N>(0);
    if (bounds_[p].empty()) return origin;
    auto try_dir = [&](const SpatialVector<N>& omega, MinkVector<N>& best, double& best_score) {
      for (double r : {0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0}) {
        const MinkVector<N> x = HyperboloidPoint<N>::polar(r, omega).vec();
        const double s = piece_slack(p, x) / x[0];
        if (s > best_score) { best_score = s; best = x; }
      }
    };
    MinkVector<N> best = origin;
    double best_score = piece_slack(p, origin);
    try_dir(regions_[p].deepest_direction(), best, best_score);
    if (best_score <= 1e-9) {
      if constexpr (N == 2) {
        for (const auto& [s, e] : regions_[p].arcs())
          for (double f : {0.25, 0.5, 0.75}) {
            const double th = s + f * (e - s);
            try_dir(SpatialVector<N>(std::cos(th), std::sin(th)), best, best_score);
          }
      }
    }
    return best;
  }

  SpineFrame<N> make_frame(std::size_t s) const {
    SpineFrame<N> f;
    if constexpr (N != 3) {
      f.error = "spines require n = 3";
      return f;
    } else {
      const auto& sp = spines_[s];
      const std::size_t k = sp.walls.size();
      if (k < 2 || sp.pieces.size() != k) {
        f.error = "spine '" + sp.id + "' star must alternate k >= 2 pieces and k walls";
        return f;
      }
      for (std::size_t i = 0; i < k; ++i) {
        auto pw = wall_ids_.find(sp.walls[i]);
        auto pp = piece_ids_.find(sp.pieces[i]);
        if (pw == wall_ids_.end() || pp == piece_ids_.end()) {
          f.error = "spine '" + sp.id + "' references unknown ids";
          return f;
        }
        f.wall_idx.push_back(pw->second);
        f.piece_idx.push_back(pp->second);
      }
      try {
        const auto c = null_pair_complement<3>(sp.u1.vec(), sp.u2.vec());
        f.basis.col(0) = c.col(0);
        f.basis.col(1) = c.col(1);
      } catch (const Error& e) {
        f.error = "spine '" + sp.id + "': " + e.what();
        return f;
      }
      auto angles = [&]() {
        std::vector<double> th;
        for (std::size_t i = 0; i < k; ++i) {
          const Eigen::Vector2d c = f.coords(wall_witness_[f.wall_idx[i]]);
          th.push_back(std::atan2(c[1], c[0]));
        }
        return th;
      };
      auto alphas = [&](const std::vector<double>& th) {
        std::vector<double> al(k);
        double sum = 0;
        for (std::size_t i = 0; i < k; ++i) {
          al[i] = detail::wrap_angle(th[i] - th[(i + k - 1) % k]);
          sum += al[i];
        }
        return std::make_pair(al, sum);
      };
      auto th = angles();
      auto [al, sum] = alphas(th);
      if (std::abs(sum - 2.0 * std::numbers::pi) > tol::face_closure) {
        f.basis.col(1) = -f.basis.col(1);
        th = angles();
        std::tie(al, sum) = alphas(th);
      }
      if (std::abs(sum - 2.0 * std::numbers::pi) > tol::face_closure) {
        std::ostringstream os;
        os << "spine '" << sp.id << "': dihedral angles sum to " << sum << ", star ordering is inconsistent";
        f.error = os.str();
      }
      f.wall_angle = th;
      f.alpha = al;
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t w = f.wall_idx[i];
        int side = 0;
        for (const auto& b : bounds_[f.piece_idx[i]])
          if (b.wall == w) side = b.side;
        f.crossing.push_back(-static_cast<double>(side == 0 ? 1 : side) * walls_[w].normal);
      }
      return f;
    }
  }

  std::vector<Wall<N>> walls_;
  std::vector<TopPiece<N>> pieces_;
  std::vector<SpineGeodesic<N>> spines_;
  std::map<std::string, std::size_t> wall_ids_, piece_ids_, spine_ids_;
  std::vector<std::vector<WallSide>> bounds_;
  std::vector<std::array<std::ptrdiff_t, 2>> wall_pieces_;
  std::vector<IdealRegion<N>> regions_;
  std::vector<MinkVector<N>> wall_witness_, piece_witness_;
  std::vector<SpineFrame<N>> frames_;
  std::vector<std::string> issues_;
};

/// Positive weights, one per wall in the complex's wall order.
struct WeightFamily {
  std::vector<double> a;
};

template <int N>
WeightFamily weights_from_map(const StratComplex<N>& s, const std::map<std::string, double>& m) {
  WeightFamily w;
  w.a.assign(s.walls().size(), 0.0);
  std::vector<bool> set(s.walls().size(), false);
  for (const auto& [id, val] : m) {
    const std::size_t i = s.wall_index(id);
    w.a[i] = val;
    set[i] = true;
  }
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (!set[i]) missing.push_back("no weight for wall '" + s.walls()[i].id + "'");
  if (!missing.empty()) throw ValidationError("incomplete weight family", missing);
  return w;
}

template <int N>
void check_weights(const StratComplex<N>& s, const WeightFamily& w) {
  if (w.a.size() != s.walls().size())
    throw ValidationError("weight family has " + std::to_string(w.a.size()) + " entries for " +
                          std::to_string(s.walls().size()) + " walls");
  std::vector<std::string> bad;
  for (std::size_t i = 0; i < w.a.size(); ++i)
    if (!(w.a[i] > 0) || !std::isfinite(w.a[i])) bad.push_back("wall '" + s.walls()[i].id + "': weights must be positive");
  if (!bad.empty()) throw ValidationError("weights must be positive", bad);
}

/// Checks every structural invariant of the complex.
template <int N>
ValidationReport validate_complex(const StratComplex<N>& s, std::size_t max_pairs = 400) {
  ValidationReport rep;
  rep.errors = s.issues();

  for (std::size_t w = 0; w < s.walls().size(); ++w) {
    const auto& wall = s.walls()[w];
    const double q = norm2<N>(wall.normal);
    if (std::abs(q - 1.0) > 1e-8) rep.errors.push_back("wall '" + wall.id + "' normal is not unit spacelike");
    for (const auto& u : wall.ideal_vertices)
      if (std::abs(inner<N>(u.vec(), wall.normal)) > 1e-8)
        rep.errors.push_back("wall '" + wall.id + "' ideal vertex off its carrier");
    if (N == 3 && wall.ideal_vertices.size() < 2)
      rep.errors.push_back("wall '" + wall.id + "' needs at least 2 ideal vertices");
    if (N == 2 && wall.ideal_vertices.size() != 2)
      rep.errors.push_back("wall '" + wall.id + "' needs exactly 2 ideal endpoints");
    if (!s.wall_contains(w, s.wall_witness(w), 1e-8))
      rep.errors.push_back("wall '" + wall.id + "' has no point inside its bounds");
  }

  for (std::size_t p = 0; p < s.pieces().size(); ++p) {
    const auto& piece = s.pieces()[p];
    const MinkVector<N>& x = s.piece_witness(p);
    if (std::abs(norm2<N>(x) + 1.0) > 1e-8 * std::max(1.0, x[0] * x[0]) || !(x[0] > 0))
      rep.errors.push_back("piece '" + piece.id + "' witness is not on the hyperboloid");
    else if (!(s.piece_slack(p, x) > 0))
      rep.errors.push_back("piece '" + piece.id + "' is empty (no interior witness)");
  }

  for (std::size_t k = 0; k < s.spines().size(); ++k) {
    const auto& sp = s.spines()[k];
    const auto& f = s.spine_frame(k);
    if (!f.ok()) {
      rep.errors.push_back(f.error);
      continue;
    }
    const std::size_t n = f.wall_idx.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t w = f.wall_idx[i];
      const auto& wall = s.walls()[w];
      for (const auto* u : {&sp.u1, &sp.u2}) {
        bool in = std::abs(inner<N>(u->vec(), wall.normal)) <= 1e-8;
        for (const auto& h : wall.bounds) in = in && h.value(u->vec()) >= -1e-8;
        if (!in) rep.errors.push_back("spine '" + sp.id + "' endpoint not in wall '" + wall.id + "'");
      }
      const auto& wp = s.wall_pieces(w);
      const auto a = static_cast<std::ptrdiff_t>(f.piece_idx[i]);
      const auto b = static_cast<std::ptrdiff_t>(f.piece_idx[(i + 1) % n]);
      if (!((wp[0] == a && wp[1] == b) || (wp[0] == b && wp[1] == a)))
        rep.errors.push_back("spine '" + sp.id + "': wall '" + wall.id + "' does not separate '" +
                             s.pieces()[f.piece_idx[i]].id + "' and '" + s.pieces()[f.piece_idx[(i + 1) % n]].id + "'");
    }
  }

  // Pairwise separation on sampled piece pairs, walking the dual graph.
  const std::size_t np = s.pieces().size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (np * (np - 1) / 2 <= max_pairs) {
    for (std::size_t i = 0; i < np; ++i)
      for (std::size_t j = i + 1; j < np; ++j) pairs.emplace_back(i, j);
  } else {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> pick(0, np - 1);
    while (pairs.size() < max_pairs) {
      const std::size_t i = pick(rng), j = pick(rng);
      if (i != j) pairs.emplace_back(std::min(i, j), std::max(i, j));
    }
  }
  const double eps = 1e-8;
  for (auto [i, j] : pairs) {
    const auto path = s.dual_path(i, j);
    if (!path) {
      rep.errors.push_back("pieces '" + s.pieces()[i].id + "' and '" + s.pieces()[j].id + "' are not connected in the dual graph");
      continue;
    }
    bool separated = false;
    for (const auto& step : *path) {
      const MinkVector<N> m = step.side * s.walls()[step.wall].normal;
      if (s.ideal_support(i, -m) <= eps && s.ideal_support(j, m) <= eps) {
        separated = true;
        break;
      }
    }
    if (!separated)
      rep.errors.push_back("no separating wall found between '" + s.pieces()[i].id + "' and '" + s.pieces()[j].id + "'");
  }
  return rep;
}

template <int N>
void require_valid(const StratComplex<N>& s) {
  const auto rep = validate_complex(s);
  if (!rep.ok()) throw ValidationError("invalid stratification", rep.errors);
}

/// Minimum-dimension cell containing x; points within eps of a wall or spine
/// are assigned to it.
template <int N>
Location locate(const StratComplex<N>& s, const MinkVector<N>& x, double eps = tol::locate) {
  if constexpr (N == 3) {
    for (std::size_t k = 0; k < s.spines().size(); ++k)
      if (s.spine_frame(k).ok() && s.on_spine(k, x, eps)) return {CellKind::spine, k, 1};
  }
  for (std::size_t w = 0; w < s.walls().size(); ++w)
    if (s.wall_contains(w, x, eps)) return {CellKind::wall, w, N - 1};
  std::size_t best = 0;
  double best_slack = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < s.pieces().size(); ++p) {
    const double sl = s.piece_slack(p, x);
    if (sl > 0) return {CellKind::piece, p, N};
    if (sl > best_slack) { best_slack = sl; best = p; }
  }
  return {CellKind::piece, best, N};
}

template <int N>
struct DihedralAngle {
  std::string piece;
  double alpha;
};

template <int N>
std::vector<DihedralAngle<N>> dihedral_angles(const StratComplex<N>& s, const std::string& spine_id) {
  const auto& f = s.spine_frame(s.spine_index(spine_id));
  if (!f.ok()) throw ValidationError(f.error);
  std::vector<DihedralAngle<N>> out;
  for (std::size_t i = 0; i < f.alpha.size(); ++i) out.push_back({s.pieces()[f.piece_idx[i]].id, f.alpha[i]});
  return out;
}

struct SpineResidual {
  std::string spine;
  Eigen::Vector2d residual;
};

/// Per spine, sum_i a(P_i) v_i in the spine's orthonormal plane basis.
template <int N>
std::vector<SpineResidual> weight_residuals(const StratComplex<N>& s, const WeightFamily& w) {
  std::vector<SpineResidual> out;
  for (std::size_t k = 0; k < s.spines().size(); ++k) {
    const auto& f = s.spine_frame(k);
    if (!f.ok()) throw ValidationError(f.error);
    MinkVector<N> sum = MinkVector<N>::Zero();
    for (std::size_t i = 0; i < f.wall_idx.size(); ++i) sum += w.a[f.wall_idx[i]] * f.crossing[i];
    out.push_back({s.spines()[k].id, f.coords(sum)});
  }
  return out;
}

template <int N>
double max_weight_residual(const StratComplex<N>& s, const WeightFamily& w) {
  double m = 0;
  for (const auto& r : weight_residuals(s, w)) m = std::max(m, r.residual.norm());
  return m;
}

struct WeightSolution {
  Eigen::MatrixXd system;                     // 2e x f
  Eigen::MatrixXd nullspace;                  // f x k, orthonormal columns
  std::optional<Eigen::VectorXd> witness;     // strictly positive, min entry 1
  std::optional<Eigen::VectorXd> certificate; // nonnegative, nonzero, orthogonal to the nullspace
  int cone_dimension = 0;
  int walls = 0, spines = 0;
  bool dimension_bound_holds() const { return !witness || cone_dimension >= walls - 2 * spines; }
};

/// Nullspace of the spine equations and a strictly positive point in it, or a
/// Gordan certificate that none exists. The positive point is found by
/// alternating projections between the nullspace and {a >= 1}; when the two
/// sets are disjoint the limiting gap vector is the certificate.
template <int N>
WeightSolution solve_weights(const StratComplex<N>& s, int max_iter = 200000) {
  WeightSolution out;
  const int f = static_cast<int>(s.walls().size());
  const int e = static_cast<int>(s.spines().size());
  out.walls = f;
  out.spines = e;
  out.system = Eigen::MatrixXd::Zero(2 * e, f);
  for (int k = 0; k < e; ++k) {
    const auto& fr = s.spine_frame(static_cast<std::size_t>(k));
    if (!fr.ok()) throw ValidationError(fr.error);
    for (std::size_t i = 0; i < fr.wall_idx.size(); ++i) {
      const Eigen::Vector2d c = fr.coords(fr.crossing[i]);
      out.system(2 * k, static_cast<int>(fr.wall_idx[i])) += c[0];
      out.system(2 * k + 1, static_cast<int>(fr.wall_idx[i])) += c[1];
    }
  }
  if (e == 0) {
    out.nullspace = Eigen::MatrixXd::Identity(f, f);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.system, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double thresh = 1e-10 * std::max(1.0, sv.size() ? sv[0] : 0.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] > thresh) ++rank;
    out.nullspace = svd.matrixV().rightCols(f - rank);
  }
  const Eigen::MatrixXd& Z = out.nullspace;
  if (Z.cols() == 0 || f == 0) {
    if (f > 0) out.certificate = Eigen::VectorXd::Ones(f);
    return out;
  }
  auto project = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return Z * (Z.transpose() * v); };
  Eigen::VectorXd a = project(Eigen::VectorXd::Ones(f));
  double prev_gap = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    if (a.minCoeff() >= 1.0 - 1e-12) break;
    const Eigen::VectorXd b = a.cwiseMax(1.0);
    const Eigen::VectorXd next = project(b);
    const double gap = (b - next).norm();
    a = next;
    if (it > 100 && std::abs(prev_gap - gap) < 1e-15 * std::max(1.0, gap) && gap > 1e-6) break;
    prev_gap = gap;
  }
  const double lo = a.minCoeff();
  if (lo > 0 && lo >= tol::positivity * a.maxCoeff()) {
    a = project(a / lo);
    out.witness = a;
    out.cone_dimension = static_cast<int>(Z.cols());
  } else {
    const Eigen::VectorXd b = a.cwiseMax(1.0);
    Eigen::VectorXd z = b - project(b);
    if (z.norm() > 0) out.certificate = z / z.norm();
  }
  return out;
}

}  // namespace regdom
