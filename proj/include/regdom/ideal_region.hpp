#pragma once

// Regions of the ideal boundary S^{n-1} cut out by wall half-spaces, and the
// maximisation of linear functionals over them. A top piece is
// {x : side_i <x, v_i> >= 0}; its ideal region is the set of unit omega with
// side_i <(1, omega), v_i> >= 0, an intersection of spherical caps.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "regdom/lorentz.hpp"

namespace regdom {

/// side * <x, normal> >= 0.
template <int N>
struct HalfSpace {
  MinkVector<N> normal;
  int side = 1;

  double value(const MinkVector<N>& x) const { return side * inner<N>(x, normal); }
};

template <int N>
struct SupportMax {
  double value = -std::numeric_limits<double>::infinity();  // max of g . omega
  SpatialVector<N> argmax = SpatialVector<N>::Zero();
  bool empty() const { return !std::isfinite(value); }
};

template <int N>
class IdealRegion {
 public:
  IdealRegion() = default;

  explicit IdealRegion(std::vector<HalfSpace<N>> constraints) : constraints_(std::move(constraints)) {
    if constexpr (N == 2) build_arcs();
    else build_corners();
  }

  const std::vector<HalfSpace<N>>& constraints() const { return constraints_; }

  /// Counter-clockwise closed arcs (start, end) with 0 < end - start <= 2 pi (n = 2).
  const std::vector<std::pair<double, double>>& arcs() const { return arcs_; }

  /// Slack of the worst constraint at the ideal point omega (>= 0 inside).
  double slack(const SpatialVector<N>& omega) const {
    MinkVector<N> u;
    u[0] = 1.0;
    u.template tail<N>() = omega;
    double s = std::numeric_limits<double>::infinity();
    for (const auto& h : constraints_) s = std::min(s, h.value(u) / std::max(1.0, h.normal.norm()));
    return s;
  }

  bool contains(const SpatialVector<N>& omega, double eps = 1e-10) const { return slack(omega) >= -eps; }

  /// Maximum of g . omega over the region.
  SupportMax<N> maximize(const SpatialVector<N>& g) const {
    if constexpr (N == 2) return maximize_arcs(g);
    else return maximize_caps(g);
  }

  /// Ideal point deepest inside the region (largest slack), used to seed
  /// interior witnesses.
  SpatialVector<N> deepest_direction() const {
    if constexpr (N == 2) {
      double best = -1;
      SpatialVector<N> out(1.0, 0.0);
      for (const auto& [s, e] : arcs_) {
        const double m = 0.5 * (s + e);
        SpatialVector<N> w(std::cos(m), std::sin(m));
        if (e - s > best) { best = e - s; out = w; }
      }
      return out;
    } else {
      SpatialVector<N> out = SpatialVector<N>::UnitX();
      double best = -std::numeric_limits<double>::infinity();
      const int samples = 4000;
      for (int i = 0; i < samples; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / samples;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = i * std::numbers::pi * (3.0 - std::sqrt(5.0));
        SpatialVector<N> w(r * std::cos(phi), r * std::sin(phi), z);
        const double s = slack(w);
        if (s > best) { best = s; out = w; }
      }
      return out;
    }
  }

  bool empty() const {
    if constexpr (N == 2) return arcs_.empty();
    else return slack(deepest_direction()) < -1e-9 && corners_.empty();
  }

 private:
  static double wrap(double t) {
    const double two_pi = 2.0 * std::numbers::pi;
    t = std::fmod(t, two_pi);
    return t < 0 ? t + two_pi : t;
  }

  // Breakpoints are the constraint circles' endpoints; the region is a union
  // of the intervals between consecutive breakpoints whose midpoints satisfy
  // every constraint.
  void build_arcs() {
    arcs_.clear();
    if (constraints_.empty()) {
      arcs_.emplace_back(0.0, 2.0 * std::numbers::pi);
      return;
    }
    std::vector<double> cuts;
    for (const auto& h : constraints_) {
      const auto& v = h.normal;
      const double r = std::hypot(v[1], v[2]);
      if (r <= std::abs(v[0])) continue;  // circle misses S^1
      const double phi = std::atan2(v[2], v[1]);
      const double delta = std::acos(std::clamp(v[0] / r, -1.0, 1.0));
      cuts.push_back(wrap(phi - delta));
      cuts.push_back(wrap(phi + delta));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return b - a < 1e-15; }), cuts.end());
    if (cuts.empty()) {
      SpatialVector<N> w(1.0, 0.0);
      if (contains(w)) arcs_.emplace_back(0.0, 2.0 * std::numbers::pi);
      return;
    }
    const std::size_t m = cuts.size();
    std::vector<bool> in(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double s = cuts[i];
      const double e = i + 1 < m ? cuts[i + 1] : cuts[0] + 2.0 * std::numbers::pi;
      const double mid = 0.5 * (s + e);
      in[i] = slack(SpatialVector<N>(std::cos(mid), std::sin(mid))) > 0;
    }
    // Rotate so that we start at the beginning of a run.
    std::size_t start = 0;
    bool all = true;
    for (std::size_t i = 0; i < m; ++i) all = all && in[i];
    if (all) {
      arcs_.emplace_back(0.0, 2.0 * std::numbers::pi);
      return;
    }
    bool any = false;
    for (std::size_t i = 0; i < m; ++i) any = any || in[i];
    while (any && !(in[start] && !in[(start + m - 1) % m])) ++start;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = (start + k) % m;
      if (!in[i] || (k > 0 && in[(i + m - 1) % m])) continue;
      std::size_t j = i;
      double len = 0;
      while (in[j]) {
        const double s = cuts[j];
        const double e = j + 1 < m ? cuts[j + 1] : cuts[0] + 2.0 * std::numbers::pi;
        len += e - s;
        j = (j + 1) % m;
        if (j == i) break;
      }
      arcs_.emplace_back(cuts[i], cuts[i] + len);
    }
    // Isolated ideal points (e.g. vertices of an ideal polygon) as empty arcs.
    for (double c : cuts) {
      bool covered = false;
      for (const auto& [s, e] : arcs_) covered = covered || wrap(c - s) <= e - s + 1e-12;
      if (!covered && contains(SpatialVector<N>(std::cos(c), std::sin(c)), 1e-9)) arcs_.emplace_back(c, c);
    }
  }

  SupportMax<N> maximize_arcs(const SpatialVector<N>& g) const {
    SupportMax<N> best;
    const double r = g.norm();
    const double phi = std::atan2(g[1], g[0]);
    for (const auto& [s, e] : arcs_) {
      double th;
      if (wrap(phi - s) <= e - s) th = phi;
      else th = std::cos(s - phi) >= std::cos(e - phi) ? s : e;
      const double val = r * std::cos(th - phi);
      if (val > best.value) {
        best.value = val;
        best.argmax = SpatialVector<N>(std::cos(th), std::sin(th));
      }
    }
    return best;
  }

  // n = 3: candidates are the critical points of g . omega on S^2, on each
  // constraint circle, and the circle-circle corners inside the region.
  struct Circle {
    SpatialVector<N> center;  // in R^3
    SpatialVector<N> axis;    // unit normal of the circle's plane
    double radius;
  };

  static std::optional<Circle> circle_of(const MinkVector<N>& v) {
    const SpatialVector<N> s = v.template tail<N>();
    const double sn = s.norm();
    if (sn < 1e-15) return std::nullopt;
    const double h = v[0] / sn;  // plane axis . omega = h
    if (std::abs(h) >= 1.0) return std::nullopt;
    return Circle{h * s / sn, s / sn, std::sqrt(1.0 - h * h)};
  }

  void build_corners() {
    corners_.clear();
    std::vector<Circle> circles;
    for (const auto& hs : constraints_)
      if (auto c = circle_of(hs.normal)) circles.push_back(*c);
    for (std::size_t i = 0; i < circles.size(); ++i) {
      for (std::size_t j = i + 1; j < circles.size(); ++j) {
        // Intersection of planes a.x = ha, b.x = hb with the unit sphere.
        const auto& a = circles[i].axis;
        const auto& b = circles[j].axis;
        const double ha = a.dot(circles[i].center), hb = b.dot(circles[j].center);
        const SpatialVector<N> d = a.cross(b);
        const double dn2 = d.squaredNorm();
        if (dn2 < 1e-20) continue;
        const double ab = a.dot(b);
        const double ca = (ha - hb * ab) / (1 - ab * ab), cb = (hb - ha * ab) / (1 - ab * ab);
        const SpatialVector<N> p0 = ca * a + cb * b;
        const double rem = 1.0 - p0.squaredNorm();
        if (rem < 0) continue;
        const double t = std::sqrt(rem / dn2);
        for (double sgn : {-1.0, 1.0}) {
          SpatialVector<N> w = (p0 + sgn * t * d).normalized();
          if (contains(w, 1e-9)) corners_.push_back(w);
        }
      }
    }
    circles_ = std::move(circles);
  }

  SupportMax<N> maximize_caps(const SpatialVector<N>& g) const {
    SupportMax<N> best;
    auto consider = [&](const SpatialVector<N>& w) {
      if (!contains(w, 1e-10)) return;
      const double val = g.dot(w);
      if (val > best.value) { best.value = val; best.argmax = w; }
    };
    const double gn = g.norm();
    if (gn < 1e-300) {
      const SpatialVector<N> w = deepest_direction();
      if (contains(w, 1e-9)) { best.value = 0.0; best.argmax = w; }
      return best;
    }
    consider(g / gn);
    consider(-g / gn);
    for (const auto& c : circles_) {
      SpatialVector<N> t = g - g.dot(c.axis) * c.axis;
      const double tn = t.norm();
      if (tn < 1e-14) {
        // g parallel to the axis: g is constant on the circle.
        SpatialVector<N> any = c.axis.unitOrthogonal();
        consider(c.center + c.radius * any);
        consider(c.center - c.radius * any);
        continue;
      }
      consider(c.center + c.radius * t / tn);
      consider(c.center - c.radius * t / tn);
    }
    for (const auto& w : corners_) {
      const double val = g.dot(w);
      if (val > best.value) { best.value = val; best.argmax = w; }
    }
    return best;
  }

  std::vector<HalfSpace<N>> constraints_;
  std::vector<std::pair<double, double>> arcs_;
  std::vector<Circle> circles_;
  std::vector<SpatialVector<N>> corners_;
};

}  // namespace regdom
