#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "support.hpp"

using namespace regdom;
using fixture::gallery;
using fixture::gallery_domain;

namespace {

// Level distance across the single wall {x2 = 0} by brute force: the path
// enters the band at z(t1), crosses it and leaves at z(t2), so
// d = a d(x, z1) + sqrt(a^2 d(z1, z2)^2 + w^2) + a d(z2, y). Coarse grid over
// (t1, t2) followed by shrinking local grids.
double single_wall_oracle(double a, double w, const MinkVector<2>& x, const MinkVector<2>& y) {
  auto z = [](double t) { return MinkVector<2>(std::cosh(t), std::sinh(t), 0.0); };
  auto f = [&](double t1, double t2) {
    const double dz = hyp_distance<2>(z(t1), z(t2));
    return a * hyp_distance<2>(x, z(t1)) + std::sqrt(a * a * dz * dz + w * w) + a * hyp_distance<2>(z(t2), y);
  };
  double b1 = 0, b2 = 0, best = f(0, 0), span = 4.0;
  for (int round = 0; round < 40; ++round) {
    const double c1 = b1, c2 = b2;
    for (int i = -20; i <= 20; ++i)
      for (int j = -20; j <= 20; ++j) {
        const double t1 = c1 + span * i / 20.0, t2 = c2 + span * j / 20.0;
        const double v = f(t1, t2);
        if (v < best) best = v, b1 = t1, b2 = t2;
      }
    span *= 0.5;
  }
  return best;
}

}  // namespace

TEST(LevelMesh, ConeVerticesOnScaledHyperboloid) {
  const auto& d = gallery_domain<2>("cone");
  const auto mesh = level_mesh(d, 2.0, 0.2, 1.5);
  ASSERT_GT(mesh.size(), 50u);
  for (const auto& v : mesh.points) EXPECT_NEAR(norm2<2>(v), -4.0, 1e-9);
  ASSERT_FALSE(mesh.triangles.empty());
}

TEST(LevelMesh, VerticesOnLevelAndGaussRoundTrip) {
  for (const auto& name : {"single-geodesic-2d", "two-geodesics-2d", "octagon-multicurve-2d"}) {
    const auto& d = gallery_domain<2>(name);
    const auto mesh = level_mesh(d, 0.7, 0.2, 1.5);
    for (std::size_t i = 0; i < mesh.size(); ++i) {
      const auto c = d.ct_query(mesh.points[i]);
      EXPECT_NEAR(c.T, 0.7, 1e-7) << name;
      EXPECT_LT((c.normal - mesh.gauss[i]).norm(), 1e-7) << name;
    }
    for (double l : mesh.edge_length) EXPECT_GT(l, 0.0);
  }
  const auto& q = gallery_domain<3>("quad-spine-3d");
  const auto mesh = level_mesh(q, 1.0, 0.3, 1.0);
  int spine = 0;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const auto c = q.ct_query(mesh.points[i]);
    EXPECT_NEAR(c.T, 1.0, 1e-7);
    EXPECT_LT((c.normal - mesh.gauss[i]).norm(), 1e-7);
    if (mesh.kind[i] == CellKind::spine) ++spine;
  }
  EXPECT_GT(spine, 0);
  for (double l : mesh.edge_length) EXPECT_GT(l, 0.0);
}

TEST(LevelMesh, BandWidthEqualsWeight) {
  for (double w : {1.0, 2.5}) {
    const auto d = std::get<Scene<2>>(gallery_scene("single-geodesic-2d", {.w = w})).domain();
    const auto mesh = level_mesh(d, 1.0, 0.2, 1.0);
    // Walk each band column from the minus side to the plus side.
    const auto adj = mesh.adjacency();
    int columns = 0;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
      if (mesh.kind[i] != CellKind::piece || (mesh.retraction[i]).norm() > 1e-15) continue;
      if (std::abs(mesh.gauss[i][2]) > 1e-9) continue;  // not on the wall
      double width = 0;
      std::size_t cur = i;
      for (int guard = 0; guard < 100; ++guard) {
        std::ptrdiff_t next = -1;
        for (auto [j, l] : adj[cur])
          if ((mesh.gauss[j] - mesh.gauss[i]).norm() < 1e-12 && mesh.retraction[j][2] > mesh.retraction[cur][2] + 1e-12) {
            next = j;
            width += l;
            break;
          }
        if (next < 0) break;
        cur = static_cast<std::size_t>(next);
      }
      EXPECT_NEAR(width, w, 1e-6);
      ++columns;
    }
    EXPECT_GT(columns, 5);
  }
}

TEST(LevelMesh, SpineRegionIsRectangleProduct) {
  const auto& q = gallery_domain<3>("quad-spine-3d");
  const auto mesh = level_mesh(q, 1.0, 0.3, 1.0);
  // Spine vertices sharing a Gauss point span exactly the 1 x 2 rectangle.
  double lo2 = 1e9, hi2 = -1e9, lo3 = 1e9, hi3 = -1e9;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    if (mesh.kind[i] != CellKind::spine) continue;
    const auto& r = mesh.retraction[i];
    EXPECT_NEAR(r[0], 0.0, 1e-12);
    EXPECT_NEAR(r[1], 0.0, 1e-12);
    lo2 = std::min(lo2, r[2]), hi2 = std::max(hi2, r[2]);
    lo3 = std::min(lo3, r[3]), hi3 = std::max(hi3, r[3]);
    EXPECT_LT(std::abs(mesh.gauss[i][2]) + std::abs(mesh.gauss[i][3]), 1e-12);
  }
  EXPECT_GE(lo2, -1e-12);
  EXPECT_LE(hi2, 1.0 + 1e-12);
  EXPECT_GE(lo3, -1e-12);
  EXPECT_LE(hi3, 2.0 + 1e-12);
  EXPECT_GT(hi2 - lo2, 0.5);
  EXPECT_GT(hi3 - lo3, 1.0);
}

TEST(LevelDistance, ConeIsScaledHyperbolic) {
  const auto& d = gallery_domain<2>("cone");
  std::mt19937_64 rng(131);
  for (int k = 0; k < 10; ++k) {
    const auto x = fixture::random_point<2>(rng, 1.0), y = fixture::random_point<2>(rng, 1.0);
    for (double a : {0.5, 3.0}) {
      const auto r = intrinsic_distance<2>(d, a, x, y, 0.1);
      EXPECT_NEAR(r.value, a * hyp_distance<2>(x, y), 0.02 * a * hyp_distance<2>(x, y));
      EXPECT_GE(r.mesh_bound, a * hyp_distance<2>(x, y) - 1e-12);
    }
  }
  const MinkVector<2> x = HyperboloidPoint<2>::from_spatial({0.2, 0.3}).vec();
  EXPECT_EQ(intrinsic_distance<2>(d, 1.0, x, x, 0.1).value, 0.0);
  EXPECT_THROW(intrinsic_distance<2>(gallery_domain<2>("single-geodesic-2d"), 1.0, x, unit<2>(0), 0.1), ValidationError);
}

TEST(LevelDistance, ExactMatchesBruteForceAcrossOneWall) {
  std::mt19937_64 rng(137);
  for (double w : {1.0, 0.3}) {
    const auto d = std::get<Scene<2>>(gallery_scene("single-geodesic-2d", {.w = w})).domain();
    const auto& s = d.complex();
    for (int k = 0; k < 10; ++k) {
      MinkVector<2> x = fixture::random_off_stratum<2>(s, rng, 2.0), y = fixture::random_off_stratum<2>(s, rng, 2.0);
      if (x[2] > 0) x[2] = -x[2];
      if (y[2] < 0) y[2] = -y[2];
      for (double a : {0.01, 0.5, 2.0, 20.0}) {
        const double exact = intrinsic_distance_exact(d, a, x, y).value;
        EXPECT_NEAR(exact, single_wall_oracle(a, w, x, y), 1e-7 * std::max(1.0, exact)) << "a=" << a;
      }
    }
  }
}

TEST(LevelDistance, PastLimitNearWall) {
  const auto& d = gallery_domain<2>("single-geodesic-2d");
  const MinkVector<2> x = HyperboloidPoint<2>::from_spatial({0.1, -0.05}).vec();
  const MinkVector<2> y = HyperboloidPoint<2>::from_spatial({-0.1, 0.05}).vec();
  const double ds = sigma_distance<2>(d, d.rho_at(x), d.rho_at(y));
  EXPECT_NEAR(ds, 1.0, 1e-9);
  const auto r = intrinsic_distance<2>(d, 0.01, x, y, 0.05);
  EXPECT_NEAR(r.value, ds, 0.03 * ds);
  EXPECT_NEAR(r.mesh_bound, ds, 0.03 * ds);
}

TEST(LevelDistance, MeshBoundConverges) {
  const auto& d = gallery_domain<2>("two-geodesics-2d");
  std::mt19937_64 rng(139);
  for (int k = 0; k < 4; ++k) {
    const auto x = fixture::random_off_stratum<2>(d.complex(), rng, 1.5), y = fixture::random_off_stratum<2>(d.complex(), rng, 1.5);
    const double exact = intrinsic_distance_exact(d, 1.0, x, y).value;
    std::vector<double> err;
    for (double h : {0.4, 0.2, 0.1}) {
      const double m = intrinsic_distance<2>(d, 1.0, x, y, h).mesh_bound;
      EXPECT_GE(m, exact - 1e-9) << "h=" << h;
      err.push_back(m - exact);
    }
    EXPECT_LE(err.back(), err.front() + 1e-9);
    EXPECT_LE(err.back(), 0.03 * exact);
  }
}

TEST(LevelDistance, RescaledConsistency) {
  const auto& d = gallery_domain<2>("two-geodesics-2d");
  std::mt19937_64 rng(149);
  for (int k = 0; k < 10; ++k) {
    const auto x = fixture::random_off_stratum<2>(d.complex(), rng, 1.5), y = fixture::random_off_stratum<2>(d.complex(), rng, 1.5);
    for (double a : {0.3, 4.0}) {
      const auto scaled = scale_domain(d, 1.0 / a);
      const double lhs = intrinsic_distance_exact(d, a, x, y).value;
      const double rhs = a * intrinsic_distance_exact(scaled, 1.0, x, y).value;
      EXPECT_NEAR(lhs, rhs, 1e-9 * std::max(1.0, lhs));
    }
  }
  const auto& q = gallery_domain<3>("quad-spine-3d");
  const MinkVector<3> x = HyperboloidPoint<3>::from_spatial({0.1, -0.4, -0.3}).vec();
  const MinkVector<3> y = HyperboloidPoint<3>::from_spatial({-0.1, 0.3, 0.4}).vec();
  const double lhs = intrinsic_distance<3>(q, 2.0, x, y, 0.15).value;
  const double rhs = 2.0 * intrinsic_distance<3>(scale_domain(q, 0.5), 1.0, x, y, 0.15).value;
  EXPECT_NEAR(lhs, rhs, 0.03 * lhs);
}

TEST(LevelDistance, QuadSpineBounds) {
  const auto& q = gallery_domain<3>("quad-spine-3d");
  const MinkVector<3> x = HyperboloidPoint<3>::from_spatial({0.0, -0.3, -0.3}).vec();
  const MinkVector<3> y = HyperboloidPoint<3>::from_spatial({0.0, 0.3, 0.3}).vec();
  const double ds = sigma_distance<3>(q, q.rho_at(x), q.rho_at(y), 0.05);
  EXPECT_NEAR(ds, std::sqrt(5.0), 0.02 * std::sqrt(5.0));
  for (double a : {0.1, 1.0}) {
    const double da = intrinsic_distance<3>(q, a, x, y, 0.15).value;
    EXPECT_GE(da, std::sqrt(5.0) - 1e-9);
    const double dh = hyp_distance<3>(x, y);
    EXPECT_GE(da, std::sqrt(5.0 + a * a * dh * dh) - 1e-9);
    // Concatenated route: to the spine, across the rectangle, then out.
    const MinkVector<3> o = unit<3>(0);
    EXPECT_LE(da, 1.03 * (a * hyp_distance<3>(x, o) + std::sqrt(5.0) + a * hyp_distance<3>(o, y)));
  }
}

TEST(Convergence, ConeRatiosConstant) {
  const auto& d = gallery_domain<2>("cone");
  std::mt19937_64 rng(151);
  std::vector<std::pair<MinkVector<2>, MinkVector<2>>> pairs;
  for (int k = 0; k < 5; ++k) pairs.emplace_back(fixture::random_point<2>(rng, 1.0), fixture::random_point<2>(rng, 1.0));
  const auto rep = convergence_report<2>(d, pairs, {0.01, 1.0, 100.0}, 0.1, 0.03, false);
  EXPECT_TRUE(rep.violations.empty());
  for (const auto& r : rep.rows) EXPECT_NEAR(r.d_a_over_a, r.d_h, 1e-9 * std::max(1.0, r.d_h));
}

TEST(Convergence, SingleGeodesicTrends) {
  const auto& d = gallery_domain<2>("single-geodesic-2d");
  std::vector<std::pair<MinkVector<2>, MinkVector<2>>> pairs = {
      {HyperboloidPoint<2>::from_spatial({0.3, -0.4}).vec(), HyperboloidPoint<2>::from_spatial({-0.2, 0.5}).vec()},
      {HyperboloidPoint<2>::from_spatial({1.0, -0.1}).vec(), HyperboloidPoint<2>::from_spatial({-0.8, 0.2}).vec()}};
  const std::vector<double> levels = {0.01, 0.1, 1.0, 10.0, 100.0};
  const auto rep = convergence_report<2>(d, pairs, levels, 0.1, 0.03, false);
  EXPECT_TRUE(rep.violations.empty());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    std::vector<ConvergenceRow> rows;
    for (const auto& r : rep.rows)
      if (r.pair == p) rows.push_back(r);
    ASSERT_EQ(rows.size(), levels.size());
    for (std::size_t i = 1; i < rows.size(); ++i) {
      EXPECT_LT(rows[i].d_a_over_a, rows[i - 1].d_a_over_a);
      EXPECT_GT(rows[i].d_a, rows[i - 1].d_a);
    }
    EXPECT_LT(std::abs(rows[0].d_a - rows[0].d_sigma), std::abs(rows[1].d_a - rows[1].d_sigma));
  }
  std::ostringstream csv;
  write_convergence_csv(csv, rep);
  const std::string text = csv.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "pair,a,d_a,d_a_over_a,d_H,d_sigma,h,budget");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 10);
}

TEST(Spectrum, ConeAndIdentity) {
  const auto& sc = gallery<2>("cone");
  const auto& d = gallery_domain<2>("cone");
  const auto& P = sc.group->presentation;
  const auto e = spectrum<2>(d, P, {1}, {0.1, 10.0}, 20, 4.5);
  EXPECT_NEAR(e.ell_hyp, translation_length_hyp<2>(P.generators[0]), 1e-10);
  EXPECT_NEAR(e.ell_sigma, 0.0, 1e-12);
  for (auto [a, ell] : e.ell_a) EXPECT_NEAR(ell / a, e.ell_hyp, 1e-6 * e.ell_hyp);
  const auto id = spectrum<2>(d, P, {}, {1.0}, 20, 4.5);
  EXPECT_EQ(id.ell_hyp, 0.0);
  EXPECT_EQ(id.ell_sigma, 0.0);
  EXPECT_EQ(id.ell_a[0].second, 0.0);
}

TEST(Spectrum, OctagonWords) {
  const auto& sc = gallery<2>("octagon-multicurve-2d");
  const auto& d = gallery_domain<2>("octagon-multicurve-2d");
  const auto& P = sc.group->presentation;
  // g1 translates along a wall of the lamination and fixes a point of Sigma.
  const auto e1 = spectrum<2>(d, P, {1}, {0.01}, 20, sc.group->core_radius);
  EXPECT_NEAR(e1.ell_sigma, 0.0, 1e-9);
  EXPECT_NEAR(e1.ell_a[0].second, 0.01 * e1.ell_hyp, 1e-6);
  // g2 g3 maps a sample vertex onto the origin by cancelling large terms.
  const auto e23 = spectrum<2>(d, P, {2, 3}, {0.01, 1.0}, 20, sc.group->core_radius);
  EXPECT_GT(e23.ell_sigma, 0.0);
  EXPECT_GE(e23.ell_a[0].second, e23.ell_sigma - 1e-9);
  EXPECT_GE(e23.ell_a[1].second, e23.ell_hyp - 1e-9);
}

TEST(Export, ObjFile) {
  const auto& d = gallery_domain<2>("single-geodesic-2d");
  const auto mesh = level_mesh(d, 1.0, 0.3, 1.0);
  std::ostringstream os;
  write_obj(os, mesh);
  std::istringstream in(os.str());
  std::size_t v = 0, f = 0;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("v ", 0) == 0) ++v;
    if (line.rfind("f ", 0) == 0) ++f;
  }
  EXPECT_EQ(v, mesh.size());
  EXPECT_EQ(f, mesh.triangles.size());
}
