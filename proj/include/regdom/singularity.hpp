#pragma once

// The initial singularity as a cell complex: one vertex per top piece, one
// edge of length a(P) per wall, one flat convex polygon per spine, with its
// path metric.

#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include "regdom/regular_domain.hpp"

namespace regdom {

struct SigmaEdge {
  std::string wall;
  std::size_t from, to;  // vertex (piece) indices, - side to + side
  double length;
};

struct FacePolygon {
  std::string spine;
  std::vector<std::size_t> vertices;      // pieces in star order
  std::vector<std::size_t> edges;         // walls in star order
  std::vector<double> lengths;            // L_i = a(P_i), edge from vertex i to i+1
  std::vector<double> angles;             // interior angle at vertex i, pi - alpha_i
  std::vector<Eigen::Vector2d> embedding; // vertex positions in the spine's plane frame
  double closure_residual = 0.0;
};

template <int N>
struct SingularityComplex {
  std::vector<std::string> vertex_ids;
  std::vector<MinkVector<N>> vertices;
  std::vector<SigmaEdge> edges;
  std::vector<FacePolygon> faces;
  double worst_edge_length_error = 0.0;
  double worst_edge_orthogonality = 0.0;
};

/// Assembles the complex and checks its invariants.
template <int N>
SingularityComplex<N> build_singularity(const RegularDomain<N>& d) {
  const auto& s = d.complex();
  SingularityComplex<N> out;
  for (std::size_t p = 0; p < s.pieces().size(); ++p) {
    out.vertex_ids.push_back(s.pieces()[p].id);
    out.vertices.push_back(d.rho_of_piece(p));
  }
  std::vector<std::string> bad;
  for (std::size_t w = 0; w < s.walls().size(); ++w) {
    const auto& wp = s.wall_pieces(w);
    if (wp[0] < 0 || wp[1] < 0) {
      bad.push_back("wall '" + s.walls()[w].id + "' lacks a piece on one side");
      continue;
    }
    const auto from = static_cast<std::size_t>(wp[0]), to = static_cast<std::size_t>(wp[1]);
    const MinkVector<N> e = out.vertices[to] - out.vertices[from];
    const double len = std::sqrt(std::max(0.0, norm2<N>(e)));
    const double aw = d.weights().a[w];
    out.worst_edge_length_error = std::max(out.worst_edge_length_error, std::abs(len - aw));
    out.worst_edge_orthogonality =
        std::max(out.worst_edge_orthogonality, (e - aw * s.walls()[w].normal).cwiseAbs().maxCoeff());
    out.edges.push_back({s.walls()[w].id, from, to, len});
  }
  const double scale = d.weights().a.empty() ? 1.0 : std::max(1.0, *std::max_element(d.weights().a.begin(), d.weights().a.end()));
  if (out.worst_edge_length_error > 1e-9 * scale)
    bad.push_back("edge length differs from its weight by " + std::to_string(out.worst_edge_length_error));
  for (std::size_t k = 0; k < s.spines().size(); ++k) {
    const auto& f = s.spine_frame(k);
    FacePolygon fp;
    fp.spine = s.spines()[k].id;
    fp.vertices = f.piece_idx;
    fp.edges = f.wall_idx;
    const std::size_t m = f.wall_idx.size();
    Eigen::Vector2d walk = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < m; ++i) {
      fp.lengths.push_back(d.weights().a[f.wall_idx[i]]);
      fp.angles.push_back(std::numbers::pi - f.alpha[i]);
      fp.embedding.push_back(f.coords(d.rho_of_piece(f.piece_idx[i]) - d.rho_of_piece(f.piece_idx[0])));
      walk += d.weights().a[f.wall_idx[i]] * f.coords(f.crossing[i]);
    }
    fp.closure_residual = walk.norm();
    if (fp.closure_residual > tol::face_closure * scale)
      bad.push_back("face '" + fp.spine + "' does not close (residual " + std::to_string(fp.closure_residual) + ")");
    out.faces.push_back(std::move(fp));
  }
  if (!bad.empty()) throw NumericError("inconsistent singularity complex", bad);
  return out;
}

/// A point on a cell of the singularity: cell index of the domain and cell
/// coordinates.
struct SigmaPoint {
  std::size_t cell = 0;
  Eigen::Vector2d s = Eigen::Vector2d::Zero();
};

/// Snaps q to the nearest cell point; throws unless q is within tol of Sigma.
template <int N>
SigmaPoint snap_to_sigma(const RegularDomain<N>& d, const MinkVector<N>& q, double tol_snap = 1e-9) {
  SigmaPoint best;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < d.cells().size(); ++c) {
    const auto& cell = d.cells()[c];
    const MinkVector<N> v = q - cell.origin;
    Eigen::Vector2d s = Eigen::Vector2d::Zero();
    if (cell.dim == 1) s[0] = std::clamp(inner<N>(v, cell.frame.col(0)), 0.0, cell.length);
    if (cell.dim == 2)
      s = detail::project_polygon(Eigen::Vector2d(inner<N>(v, cell.frame.col(0)), inner<N>(v, cell.frame.col(1))), cell.polygon);
    const double dist = (cell.point(s) - q).norm();
    if (dist < bd - 1e-12) {
      bd = dist;
      best = {c, s};
    }
  }
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if (!(bd <= tol_snap * scale)) throw ValidationError("point is not on the singularity (distance " + std::to_string(bd) + ")");
  return best;
}

/// Path metric on Sigma. Edges are exact; faces are flat convex polygons, so
/// paths inside a face are straight and crossings between faces are sampled
/// on the shared edges at spacing h.
template <int N>
class SigmaMetric {
 public:
  SigmaMetric(const RegularDomain<N>& d, double h = 0.05) : d_(&d), h_(h) {
    const auto& s = d.complex();
    const std::size_t np = s.pieces().size();
    node_pos_.assign(np, Eigen::Vector2d::Zero());
    node_cell_.assign(np, 0);
    for (std::size_t p = 0; p < np; ++p) node_cell_[p] = d.vertex_cell(p);
    adj_.assign(np, {});
    edge_nodes_.assign(s.walls().size(), {});
    face_nodes_.assign(s.spines().size(), {});
    std::vector<std::vector<std::size_t>> faces_of_wall(s.walls().size());
    for (std::size_t k = 0; k < s.spines().size(); ++k)
      for (std::size_t w : s.spine_frame(k).wall_idx) faces_of_wall[w].push_back(k);
    for (std::size_t w = 0; w < s.walls().size(); ++w) {
      const auto& cell = d.cells()[d.edge_cell(w)];
      const auto& wp = s.wall_pieces(w);
      if (wp[0] < 0 || wp[1] < 0) continue;
      const std::size_t a = static_cast<std::size_t>(wp[0]), b = static_cast<std::size_t>(wp[1]);
      std::vector<std::pair<double, std::size_t>> chain{{0.0, a}};
      if (!faces_of_wall[w].empty()) {
        const int m = std::max(1, static_cast<int>(std::ceil(cell.length / h_)));
        for (int i = 1; i < m; ++i) {
          const double t = cell.length * i / m;
          const std::size_t id = add_node(d.edge_cell(w), Eigen::Vector2d(t, 0.0));
          chain.emplace_back(t, id);
        }
      }
      chain.emplace_back(cell.length, b);
      for (std::size_t i = 0; i + 1 < chain.size(); ++i) link(chain[i].second, chain[i + 1].second, chain[i + 1].first - chain[i].first);
      for (auto& [t, id] : chain) edge_nodes_[w].push_back(id);
      for (std::size_t k : faces_of_wall[w])
        for (auto& [t, id] : chain) face_nodes_[k].push_back(id);
    }
    for (auto& fn : face_nodes_) {
      std::sort(fn.begin(), fn.end());
      fn.erase(std::unique(fn.begin(), fn.end()), fn.end());
    }
    for (std::size_t k = 0; k < face_nodes_.size(); ++k) {
      const auto& fn = face_nodes_[k];
      for (std::size_t i = 0; i < fn.size(); ++i)
        for (std::size_t j = i + 1; j < fn.size(); ++j) link(fn[i], fn[j], spacelike_dist(world(fn[i]), world(fn[j])));
    }
  }

  double resolution() const { return h_; }

  double distance(const SigmaPoint& p, const SigmaPoint& q) const {
    const auto sp = attach(p), sq = attach(q);
    double direct = std::numeric_limits<double>::infinity();
    if (share_cell(p, q)) direct = spacelike_dist(d_->cells()[p.cell].point(p.s), d_->cells()[q.cell].point(q.s));
    const std::size_t n = adj_.size();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (auto [id, c] : sp)
      if (c < dist[id]) { dist[id] = c; pq.emplace(c, id); }
    std::vector<double> exit(n, std::numeric_limits<double>::infinity());
    for (auto [id, c] : sq) exit[id] = std::min(exit[id], c);
    double best = direct;
    while (!pq.empty()) {
      auto [du, u] = pq.top();
      pq.pop();
      if (du > dist[u] || du >= best) continue;
      if (std::isfinite(exit[u])) best = std::min(best, du + exit[u]);
      for (auto [v, w] : adj_[u]) {
        if (du + w < dist[v]) {
          dist[v] = du + w;
          pq.emplace(dist[v], v);
        }
      }
    }
    if (!std::isfinite(best)) throw NumericError("singularity points lie in different components (data corruption)");
    return best;
  }

 private:
  static double spacelike_dist(const MinkVector<N>& a, const MinkVector<N>& b) {
    return std::sqrt(std::max(0.0, norm2<N>(MinkVector<N>(a - b))));
  }

  MinkVector<N> world(std::size_t node) const { return d_->cells()[node_cell_[node]].point(node_pos_[node]); }

  std::size_t add_node(std::size_t cell, const Eigen::Vector2d& s) {
    node_cell_.push_back(cell);
    node_pos_.push_back(s);
    adj_.emplace_back();
    return adj_.size() - 1;
  }

  void link(std::size_t a, std::size_t b, double w) {
    adj_[a].emplace_back(b, w);
    adj_[b].emplace_back(a, w);
  }

  // Faces (spine indices) whose closure contains the point.
  std::vector<std::size_t> faces_containing(const SigmaPoint& p) const {
    const auto& cell = d_->cells()[p.cell];
    const auto& s = d_->complex();
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < s.spines().size(); ++k) {
      const auto& f = s.spine_frame(k);
      bool in = false;
      if (cell.kind == CellKind::spine) in = cell.source == k;
      if (cell.kind == CellKind::wall) in = std::find(f.wall_idx.begin(), f.wall_idx.end(), cell.source) != f.wall_idx.end();
      if (cell.kind == CellKind::piece) in = std::find(f.piece_idx.begin(), f.piece_idx.end(), cell.source) != f.piece_idx.end();
      if (in) out.push_back(k);
    }
    return out;
  }

  bool share_cell(const SigmaPoint& p, const SigmaPoint& q) const {
    const auto& cp = d_->cells()[p.cell];
    const auto& cq = d_->cells()[q.cell];
    if (p.cell == q.cell) return true;
    const auto fp = faces_containing(p), fq = faces_containing(q);
    for (std::size_t a : fp)
      if (std::find(fq.begin(), fq.end(), a) != fq.end()) return true;
    auto on_edge = [&](const Cell<N>& e, const Cell<N>& v) {
      if (e.kind != CellKind::wall || v.kind != CellKind::piece) return false;
      const auto& wp = d_->complex().wall_pieces(e.source);
      return wp[0] == static_cast<std::ptrdiff_t>(v.source) || wp[1] == static_cast<std::ptrdiff_t>(v.source);
    };
    return on_edge(cp, cq) || on_edge(cq, cp);
  }

  // Graph nodes reachable from p by a straight path inside one closed cell.
  std::vector<std::pair<std::size_t, double>> attach(const SigmaPoint& p) const {
    const auto& cell = d_->cells()[p.cell];
    const MinkVector<N> x = cell.point(p.s);
    std::vector<std::pair<std::size_t, double>> out;
    if (cell.kind == CellKind::piece) out.emplace_back(cell.source, 0.0);
    if (cell.kind == CellKind::wall)
      for (std::size_t id : edge_nodes_[cell.source]) out.emplace_back(id, spacelike_dist(x, world(id)));
    for (std::size_t k : faces_containing(p))
      for (std::size_t id : face_nodes_[k]) out.emplace_back(id, spacelike_dist(x, world(id)));
    return out;
  }

  const RegularDomain<N>* d_;
  double h_;
  std::vector<std::size_t> node_cell_;
  std::vector<Eigen::Vector2d> node_pos_;
  std::vector<std::vector<std::pair<std::size_t, double>>> adj_;
  std::vector<std::vector<std::size_t>> edge_nodes_, face_nodes_;
};

/// d_Sigma between two points of the singularity (snapped within 1e-9).
template <int N>
double sigma_distance(const RegularDomain<N>& d, const MinkVector<N>& r1, const MinkVector<N>& r2, double h = 0.05) {
  SigmaMetric<N> m(d, h);
  return m.distance(snap_to_sigma(d, r1), snap_to_sigma(d, r2));
}

}  // namespace regdom
