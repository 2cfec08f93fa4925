// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "support.hpp"

using namespace regdom;
using fixture::gallery;
using fixture::gallery_domain;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Running maximum of an error, compared against a tolerance at the end.
struct Worst {
  double value = 0.0;
  void add(double e) { value = std::max(value, std::isnan(e) ? std::numeric_limits<double>::infinity() : e); }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const std::vector<std::string> kScenes2 = {"cone", "single-geodesic-2d", "two-geodesics-2d", "octagon-multicurve-2d"};

template <class F>
void for_each_fixture(F&& f) {
  for (const auto& name : kScenes2) f(name, gallery_domain<2>(name));
  f(std::string("quad-spine-3d"), gallery_domain<3>("quad-spine-3d"));
}

// 1 ------------------------------------------------------------------------
Outcome cone_exactness() {
  const auto& d = gallery_domain<2>("cone");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> A(0.05, 3.0);
  Worst err;
  for (int k = 0; k < 10000; ++k) {
    const MinkVector<2> p = A(rng) * fixture::random_point<2>(rng, 2.0);
    const double T = std::sqrt(p[0] * p[0] - p[1] * p[1] - p[2] * p[2]);
    const auto c = d.ct_query(p);
    err.add(std::abs(c.T - T));
    err.add(c.r.cwiseAbs().maxCoeff());
    err.add((c.normal - p / T).cwiseAbs().maxCoeff());
  }
  return {err.value <= 1e-9, "10^4 points, max error " + fmt(err.value)};
}

// 2 ------------------------------------------------------------------------
Outcome ct_gradient() {
  Worst err;
  std::mt19937_64 rng(2);
  for_each_fixture([&](const std::string&, const auto& d) {
    constexpr int N = std::decay_t<decltype(d)>::dim;
    const double eps = 1e-6;
    for (int k = 0; k < 1000; ++k) {
      const MinkVector<N> p = fixture::random_interior<N>(d, rng);
      const MinkVector<N> u = fixture::random_direction<N>(rng);
      const double fd = (d.ct_query(MinkVector<N>(p + eps * u)).T - d.ct_query(MinkVector<N>(p - eps * u)).T) / (2 * eps);
      err.add(std::abs(fd - inner<N>(d.ct_query(p).gradient(), u)));
    }
  });
  return {err.value <= 1e-5, "5 fixtures x 10^3 samples, max |FD - <-N,u>| " + fmt(err.value)};
}

// 3 ------------------------------------------------------------------------
Outcome concavity_support() {
  Worst concave, support, pairing;
  std::mt19937_64 rng(3);
  for_each_fixture([&](const std::string&, const auto& d) {
    constexpr int N = std::decay_t<decltype(d)>::dim;
    for (int k = 0; k < 1000; ++k) {
      const MinkVector<N> p = fixture::random_interior<N>(d, rng), q = fixture::random_interior<N>(d, rng);
      const auto cp = d.ct_query(p), cq = d.ct_query(q);
      for (double t : {0.25, 0.5, 0.75})
        concave.add(t * cp.T + (1 - t) * cq.T - d.ct_query(MinkVector<N>(t * p + (1 - t) * q)).T);
      // q lies in the future of the support plane of p at r(p).
      support.add(inner<N>(MinkVector<N>(q - cp.r), MinkVector<N>(p - cp.r)));
      pairing.add(-inner<N>(MinkVector<N>(cp.T * cp.normal - cq.T * cq.normal), MinkVector<N>(cp.r - cq.r)));
    }
  });
  const bool ok = concave.value <= 1e-9 && support.value <= 1e-9 && pairing.value <= 1e-9;
  return {ok, "5 fixtures x 10^3: concavity violation " + fmt(concave.value) + ", support " + fmt(support.value) +
                  ", pairing " + fmt(pairing.value)};
}

// 4 ------------------------------------------------------------------------
Outcome psi_properties() {
  Worst lip, conv;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-3, 3), U01(0, 1);
  for_each_fixture([&](const std::string&, const auto& d) {
    constexpr int N = std::decay_t<decltype(d)>::dim;
    auto rnd = [&] {
      SpatialVector<N> y;
      for (int i = 0; i < N; ++i) y[i] = U(rng);
      return y;
    };
    for (int k = 0; k < 1000; ++k) {
      const SpatialVector<N> a = rnd(), b = rnd(), c = rnd();
      const double pa = d.boundary_height(a), pb = d.boundary_height(b), pc = d.boundary_height(c);
      lip.add(std::abs(pa - pb) - (a - b).norm());
      // Triple: convex combination of all three points.
      double w1 = U01(rng), w2 = U01(rng), w3 = U01(rng);
      const double s = w1 + w2 + w3;
      w1 /= s, w2 /= s, w3 /= s;
      conv.add(d.boundary_height(SpatialVector<N>(w1 * a + w2 * b + w3 * c)) - (w1 * pa + w2 * pb + w3 * pc));
    }
  });
  return {lip.value <= 1e-9 && conv.value <= 1e-9,
          "5 fixtures x 10^3: Lipschitz excess " + fmt(lip.value) + ", convexity excess " + fmt(conv.value)};
}

// 5 ------------------------------------------------------------------------
Outcome weight_algebra() {
  const auto& sc = gallery<3>("quad-spine-3d");
  const auto s = sc.complex();
  const auto sol = solve_weights(s);
  const int f = static_cast<int>(s.walls().size()), e = static_cast<int>(s.spines().size());
  bool ok = sol.cone_dimension == 2 && sol.cone_dimension == f - 2 * e && sol.witness.has_value();
  Worst res;
  if (sol.witness) {
    ok = ok && sol.witness->minCoeff() > 0;
    res.add(max_weight_residual(s, WeightFamily{std::vector<double>(sol.witness->data(), sol.witness->data() + f)}));
  }
  for (int c = 0; c < sol.nullspace.cols(); ++c) {
    Eigen::VectorXd v = sol.nullspace.col(c);
    v /= v.cwiseAbs().maxCoeff();
    res.add((sol.system * v).cwiseAbs().maxCoeff());
  }
  const auto& d = gallery_domain<3>("quad-spine-3d");
  const WeightFamily a = weights_from_map(s, {{"P1", 1}, {"P2", 2}, {"P3", 1}, {"P4", 2}});
  ok = ok && (a.a == d.weights().a);
  const auto sig = build_singularity(d);
  Worst shape;
  if (sig.faces.size() != 1) return {false, "expected one face, got " + std::to_string(sig.faces.size())};
  const auto& face = sig.faces[0];
  const std::vector<double> want = {1, 2, 1, 2};
  if (face.lengths.size() != 4) return {false, "face is not a quadrilateral"};
  for (std::size_t i = 0; i < 4; ++i) {
    shape.add(std::abs(face.lengths[i] - want[i]));
    shape.add(std::abs(face.angles[i] - (std::numbers::pi - std::numbers::pi / 2)));
    const Eigen::Vector2d e1 = face.embedding[(i + 1) % 4] - face.embedding[i];
    const Eigen::Vector2d e2 = face.embedding[(i + 2) % 4] - face.embedding[(i + 1) % 4];
    shape.add(std::abs(e1.norm() - want[i]));
    shape.add(std::abs(e1.dot(e2)));
  }
  ok = ok && res.value < 1e-12 && face.closure_residual < 1e-12 && shape.value < 1e-12;
  return {ok, "cone dimension " + std::to_string(sol.cone_dimension) + " (f-2e = " + std::to_string(f - 2 * e) +
                  "), witness residual " + fmt(res.value) + ", closure " + fmt(face.closure_residual) +
                  ", rectangle error " + fmt(shape.value)};
}

// 6 ------------------------------------------------------------------------
Outcome duality_round_trip() {
  Worst err;
  std::mt19937_64 rng(6);
  for_each_fixture([&](const std::string&, const auto& d) {
    constexpr int N = std::decay_t<decltype(d)>::dim;
    for (int k = 0; k < 1000; ++k) {
      const MinkVector<N> x = fixture::random_off_stratum<N>(d.complex(), rng, 1.5);
      const MinkVector<N> r = d.rho_at(x);
      for (double a : {0.5, 2.0}) {
        const auto c = d.ct_query(d.level_point(a, x));
        err.add((c.r - r).cwiseAbs().maxCoeff());
        err.add((c.normal - x).cwiseAbs().maxCoeff());
      }
    }
  });
  return {err.value <= 1e-9, "5 fixtures x 10^3 x 2 levels, max error " + fmt(err.value)};
}

// 7, 8 ---------------------------------------------------------------------
constexpr double kMeshH = 0.05;
const std::vector<double> kLevels = {0.01, 0.1, 1.0, 10.0, 100.0};

struct FixtureReport {
  std::string name;
  ConvergenceReport rep;
  double seconds = 0.0;
};

// 50 pairs with endpoints in different pieces, inside the core of the scene.
std::vector<std::pair<MinkVector<2>, MinkVector<2>>> cross_pairs(const RegularDomain<2>& d, std::uint64_t seed, double R) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<MinkVector<2>, MinkVector<2>>> out;
  while (out.size() < 50) {
    const auto x = fixture::random_off_stratum<2>(d.complex(), rng, R), y = fixture::random_off_stratum<2>(d.complex(), rng, R);
    if (locate(d.complex(), x).index != locate(d.complex(), y).index) out.emplace_back(x, y);
  }
  return out;
}

const std::vector<FixtureReport>& distance_reports() {
  static const std::vector<FixtureReport> reports = [] {
    std::vector<FixtureReport> out;
    for (const auto& [name, R] : {std::pair<std::string, double>{"single-geodesic-2d", 1.5}, {"octagon-multicurve-2d", 1.0}}) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto& d = gallery_domain<2>(name);
      FixtureReport fr;
      fr.name = name;
      fr.rep = convergence_report<2>(d, cross_pairs(d, 7, R), kLevels, kMeshH, 0.03, true);
      fr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      out.push_back(std::move(fr));
    }
    return out;
  }();
  return reports;
}

Outcome sandwich() {
  bool ok = true;
  std::string detail;
  for (const auto& fr : distance_reports()) {
    Worst slack;
    for (const auto& r : fr.rep.rows) slack.add((r.mesh_bound - r.d_a) / r.d_a);
    ok = ok && fr.rep.violations.empty() && slack.value <= 0.03;
    detail += fr.name + ": " + std::to_string(fr.rep.violations.size()) + " violations, mesh slack " + fmt(slack.value) +
              "; ";
    for (std::size_t i = 0; i < std::min<std::size_t>(3, fr.rep.violations.size()); ++i)
      detail += "[" + fr.rep.violations[i] + "] ";
  }
  return {ok, "50 pairs x 5 levels, h = " + fmt(kMeshH) + ", budget 3%: " + detail};
}

Outcome trends() {
  bool ok = true;
  std::string detail;
  for (const auto& fr : distance_reports()) {
    std::map<std::size_t, std::map<double, ConvergenceRow>> by;
    for (const auto& r : fr.rep.rows) by[r.pair][r.a] = r;
    int bad_h = 0, bad_s = 0;
    Worst gap_h, gap_s;
    for (const auto& [p, rows] : by) {
      auto gh = [&](double a) { return std::abs(rows.at(a).d_a_over_a - rows.at(a).d_h); };
      auto gs = [&](double a) { return std::abs(rows.at(a).d_a - rows.at(a).d_sigma); };
      if (!(gh(10) <= gh(1) + 1e-12 && gh(100) <= gh(10) + 1e-12)) ++bad_h;
      if (!(gs(0.1) <= gs(1) + 1e-12 && gs(0.01) <= gs(0.1) + 1e-12)) ++bad_s;
      gap_h.add(gh(100) / rows.at(100.0).d_h);
      gap_s.add(gs(0.01) / rows.at(0.01).d_sigma);
    }
    ok = ok && bad_h == 0 && bad_s == 0 && gap_h.value < 0.05 && gap_s.value < 0.10;
    detail += fr.name + ": non-monotone " + std::to_string(bad_h) + "/" + std::to_string(bad_s) + ", gap(a=100) " +
              fmt(gap_h.value) + ", gap(a=0.01) " + fmt(gap_s.value) + "; ";
  }
  return {ok, detail + "distances shared with criterion 7"};
}

// 9 ------------------------------------------------------------------------
Outcome spectra() {
  const auto& sc = gallery<2>("octagon-multicurve-2d");
  const auto& d = gallery_domain<2>("octagon-multicurve-2d");
  const auto& P = sc.group->presentation;
  bool ok = true;
  int words = 0;
  std::string detail;
  for (int letter = 1; letter <= P.rank(); ++letter) {
    const auto e = spectrum<2>(d, P, {letter}, {0.01, 100.0}, 40, sc.group->core_radius, kMeshH, 9);
    const double hi = std::abs(e.ell_a[1].second / 100.0 - e.ell_hyp) / e.ell_hyp;
    if (e.ell_sigma < 1e-9) {
      // The axis lies on a wall of the lamination: the limit length is 0.
      detail += "g" + std::to_string(letter) + ": l_S = 0, skipped; ";
      continue;
    }
    const double lo = std::abs(e.ell_a[0].second - e.ell_sigma) / e.ell_sigma;
    ok = ok && hi < 0.05 && lo < 0.10;
    ++words;
    detail += "g" + std::to_string(letter) + ": |l_a/a - l_H|/l_H " + fmt(hi) + ", |l_a - l_S|/l_S " + fmt(lo) + "; ";
  }
  return {ok && words >= 3, std::to_string(words) + " words: " + detail};
}

// 10 -----------------------------------------------------------------------
Outcome invariance() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> U(-1, 1), L(0.2, 5.0);
  const auto& sc = gallery<2>("octagon-multicurve-2d");
  const auto& d = gallery_domain<2>("octagon-multicurve-2d");
  const auto& P = sc.group->presentation;

  // Coboundary: the offset v translates every vertex and the cocycle moves
  // by the coboundary of -v.
  Worst cob;
  for (int k = 0; k < 10; ++k) {
    const MinkVector<2> v(U(rng), U(rng), U(rng));
    const auto moved = build_domain(d.complex(), d.weights(), d.base(), v);
    std::multiset<std::vector<double>> a, b;
    for (const auto& r : d.vertex_positions()) a.insert({r[0] + v[0], r[1] + v[1], r[2] + v[2]});
    for (const auto& r : moved.vertex_positions()) b.insert({r[0], r[1], r[2]});
    for (std::size_t i = 0; i < d.vertex_positions().size(); ++i)
      cob.add((moved.vertex_positions()[i] - d.vertex_positions()[i] - v).cwiseAbs().maxCoeff());
    const auto cb = coboundary(P, MinkVector<2>(-v));
    for (std::size_t g = 0; g < P.generators.size(); ++g)
      cob.add((domain_cocycle(moved, P.generators[g]) - (domain_cocycle(d, P.generators[g]) + cb[g])).cwiseAbs().maxCoeff());
    for (int j = 0; j < 20; ++j) {
      const MinkVector<2> p = fixture::random_interior<2>(d, rng);
      cob.add(std::abs(moved.ct_query(MinkVector<2>(p + v)).T - d.ct_query(p).T));
    }
  }

  // Scaling T_{tau/a}(p/a) = T_tau(p)/a.
  Worst scale;
  int scaled = 0;
  for_each_fixture([&](const std::string&, const auto& dom) {
    constexpr int N = std::decay_t<decltype(dom)>::dim;
    for (int k = 0; k < 200; ++k, ++scaled) {
      const double a = L(rng);
      const auto ds = scale_domain(dom, 1.0 / a);
      const MinkVector<N> p = fixture::random_interior<N>(dom, rng);
      scale.add(std::abs(ds.ct_query(MinkVector<N>(p / a)).T - dom.ct_query(p).T / a));
    }
  });

  // Equivariance over the word ball inside the core.
  Worst eq;
  int checked = 0;
  const auto ball = extend_cocycle(P, sc.group->word_ball);
  std::uniform_real_distribution<double> A(0.2, 1.5);
  for (const auto& g : ball.elements) {
    for (int k = 0; k < 20; ++k) {
      const MinkVector<2> x = fixture::random_off_stratum<2>(d.complex(), rng, 1.0);
      if (hyp_distance<2>(MinkVector<2>(g.linear * x), unit<2>(0)) > sc.group->core_radius) continue;
      const MinkVector<2> p = d.level_point(A(rng), x);
      const MinkVector<2> gp = deformed_apply(g, p);
      const auto c = d.ct_query(p), cg = d.ct_query(gp);
      const double s = std::max(1.0, gp.cwiseAbs().maxCoeff());
      eq.add(std::abs(cg.T - c.T) / s);
      eq.add((cg.r - deformed_apply(g, c.r)).cwiseAbs().maxCoeff() / s);
      eq.add((cg.normal - g.linear * c.normal).cwiseAbs().maxCoeff() / s);
      ++checked;
    }
  }
  const bool ok = cob.value <= 1e-9 && scale.value <= 1e-9 && eq.value <= 1e-8 && scaled >= 1000 && checked > 0;
  return {ok, "coboundary " + fmt(cob.value) + ", scaling (" + std::to_string(scaled) + " points) " + fmt(scale.value) +
                  ", equivariance (" + std::to_string(checked) + " points, relative) " + fmt(eq.value)};
}

// 11 -----------------------------------------------------------------------
Outcome measure_laws() {
  Worst closed, mono;
  std::mt19937_64 rng(11);
  int skipped = 0;
  for_each_fixture([&](const std::string&, const auto& d) {
    constexpr int N = std::decay_t<decltype(d)>::dim;
    const auto& s = d.complex();
    const double R = N == 2 ? 2.0 : 1.5;
    for (int done = 0, k = 0; done < 1000; ++k) {
      std::vector<MinkVector<N>> poly;
      for (int i = 0; i < 3 + k % 5; ++i) poly.push_back(fixture::random_off_stratum<N>(s, rng, R));
      poly.push_back(poly.front());
      try {
        closed.add(path_measure<N>(s, d.weights(), poly).total.cwiseAbs().maxCoeff());
        ++done;
      } catch (const NumericError&) {
        ++skipped;  // a segment meets a spine or runs inside a wall
      }
    }
    for (int k = 0; k < 1000; ++k) {
      const auto x = fixture::random_off_stratum<N>(s, rng, R), y = fixture::random_off_stratum<N>(s, rng, R);
      const MinkVector<N> rx = d.rho_at(x), ry = d.rho_at(y);
      mono.add(-inner<N>(MinkVector<N>(ry - rx), y));
      mono.add(inner<N>(MinkVector<N>(ry - rx), x));
    }
  });
  return {closed.value <= 1e-9 && mono.value <= 1e-9,
          "5 fixtures x 10^3 closed paths, max |total| " + fmt(closed.value) + " (" + std::to_string(skipped) +
              " non-admissible redrawn); monotonicity excess " + fmt(mono.value)};
}

// 12 -----------------------------------------------------------------------
Outcome loxodromic() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> T(0.2, 2.0), Th(0.3, std::numbers::pi - 0.3), C(-1.0, 1.0);
  Worst err;
  int missing = 0;
  for (int k = 0; k < 100; ++k) {
    // Conjugate a boost-rotation by a random element of the identity component.
    LorentzMatrix<3> h = LorentzMatrix<3>::Identity();
    for (int i = 1; i <= 3; ++i) h = h * boost<3>(i, C(rng));
    h = h * rotation<3>(1, 2, 3 * C(rng)) * rotation<3>(2, 3, 3 * C(rng));
    const LorentzMatrix<3> g = h * fixture::loxodromic(T(rng), Th(rng)) * lorentz_inverse<3>(h);
    const MinkVector<3> t(C(rng), C(rng), C(rng), C(rng));
    const auto rep = loxodromic_fixed_point<3>(g, t);
    if (!rep.z) {
      ++missing;
      continue;
    }
    err.add((g * *rep.z + t - *rep.z).cwiseAbs().maxCoeff());
  }
  return {missing == 0 && err.value <= 1e-9,
          "100 cases, max |gz + t - z| " + fmt(err.value) + (missing ? ", " + std::to_string(missing) + " unsolved" : "")};
}

struct Criterion {
  int id;
  std::string title;
  double budget;  // seconds
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance criteria");
  std::vector<int> only;
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "cone fixture exactness", 5, cone_exactness},
      {2, "CT gradient", 30, ct_gradient},
      {3, "concavity and support", 30, concavity_support},
      {4, "psi properties", 10, psi_properties},
      {5, "weight algebra", 1, weight_algebra},
      {6, "singularity duality round-trip", 30, duality_round_trip},
      {7, "sandwich inequalities", 600, sandwich},
      {8, "asymptotic trends", 600, trends},
      {9, "spectra", 900, spectra},
      {10, "invariance laws", 60, invariance},
      {11, "measure laws", 30, measure_laws},
      {12, "loxodromic fixed point", 1, loxodromic},
  };
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.title << ": " << o.detail << " (" << fmt(secs)
              << " s, limit " << fmt(c.budget) << " s" << (in_time ? "" : ", over time") << ")" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
