#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "regdom/transverse_measure.hpp"
#include "support.hpp"

using namespace regdom;
using fixture::gallery;

namespace {

// Star of half-plane walls around the geodesic {x2 = x3 = 0} of H^3, wall i
// leaving the spine in direction angle th[i] of the (e2, e3) plane. Sector i
// lies between walls i and i+1.
Scene<3> star_scene(const std::vector<double>& th) {
  Scene<3> sc;
  sc.name = "star";
  const NullDirection<3> u1(MinkVector<3>(1, 1, 0, 0)), u2(MinkVector<3>(1, -1, 0, 0));
  const std::size_t k = th.size();
  for (std::size_t i = 0; i < k; ++i) {
    const MinkVector<3> n(0, 0, -std::sin(th[i]), std::cos(th[i]));
    const MinkVector<3> d(0, 0, std::cos(th[i]), std::sin(th[i]));
    sc.walls.push_back({"W" + std::to_string(i), n, {u1, u2}, {{d, 1}}, {}});
    sc.weights["W" + std::to_string(i)] = 1.0;
  }
  SpineGeodesic<3> sp{"l", u1, u2, {}, {}};
  for (std::size_t i = 0; i < k; ++i) {
    const std::string a = "W" + std::to_string(i), b = "W" + std::to_string((i + 1) % k);
    sc.pieces.push_back({"S" + std::to_string(i), {{a, 1}, {b, -1}}, {}});
    sp.pieces.push_back("S" + std::to_string(i));
    sp.walls.push_back(b);
  }
  sc.spines.push_back(sp);
  sc.base_piece = "S0";
  return sc;
}

// Unit normal of wall w oriented towards the side containing y.
MinkVector<2> towards(const MinkVector<2>& n, const MinkVector<2>& y) { return inner<2>(y, n) > 0 ? n : MinkVector<2>(-n); }

}  // namespace

TEST(Stratification, SingleGeodesicValid) {
  const auto s = gallery<2>("single-geodesic-2d").complex();
  EXPECT_TRUE(validate_complex(s).ok());
  EXPECT_EQ(s.walls().size(), 1u);
  EXPECT_EQ(s.pieces().size(), 2u);
  EXPECT_TRUE(weight_residuals(s, WeightFamily{{1.0}}).empty());
}

TEST(Stratification, QuadSpineRightAngles) {
  const auto s = gallery<3>("quad-spine-3d").complex();
  const auto rep = validate_complex(s);
  EXPECT_TRUE(rep.ok()) << (rep.errors.empty() ? "" : rep.errors.front());
  double sum = 0;
  for (const auto& a : dihedral_angles(s, "l")) {
    EXPECT_NEAR(a.alpha, std::numbers::pi / 2, 1e-12);
    sum += a.alpha;
  }
  EXPECT_NEAR(sum, 2 * std::numbers::pi, 1e-7);
}

TEST(Stratification, SymmetricAndStraightStars) {
  const double pi = std::numbers::pi;
  const auto three = star_scene({pi / 2, pi / 2 + 2 * pi / 3, pi / 2 + 4 * pi / 3}).complex();
  ASSERT_TRUE(validate_complex(three).ok());
  for (const auto& a : dihedral_angles(three, "l")) EXPECT_NEAR(a.alpha, 2 * pi / 3, 1e-12);

  const auto two = star_scene({0.0, pi}).complex();
  ASSERT_TRUE(validate_complex(two).ok());
  for (const auto& a : dihedral_angles(two, "l")) EXPECT_NEAR(a.alpha, pi, 1e-12);
}

TEST(Stratification, WallInOnePieceRejected) {
  auto sc = gallery<2>("single-geodesic-2d");
  sc.pieces[1].bounding.clear();
  const auto rep = validate_complex(sc.complex());
  EXPECT_FALSE(rep.ok());
  EXPECT_THROW(require_valid(sc.complex()), ValidationError);
}

TEST(Stratification, LocateExamples) {
  const auto s = gallery<2>("single-geodesic-2d").complex();
  const auto on = locate(s, unit<2>(0));
  EXPECT_EQ(on.kind, CellKind::wall);
  EXPECT_EQ(on.dim, 1);
  const auto plus = locate(s, MinkVector<2>(std::cosh(1.0), 0, std::sinh(1.0)));
  EXPECT_EQ(plus.kind, CellKind::piece);
  EXPECT_EQ(s.pieces()[plus.index].id, "plus");

  const auto q = gallery<3>("quad-spine-3d").complex();
  EXPECT_EQ(locate(q, MinkVector<3>(std::cosh(0.5), std::sinh(0.5), 0, 0)).kind, CellKind::spine);
}

TEST(Stratification, LocateMatchesExhaustiveMembership) {
  const auto& s = fixture::gallery_domain<2>("octagon-multicurve-2d").complex();
  std::mt19937_64 rng(41);
  for (int k = 0; k < 300; ++k) {
    const MinkVector<2> x = fixture::random_point<2>(rng, 3.0);
    // Oracle: signs of <x, v> against every wall; the matching piece is the
    // one whose every bound holds strictly.
    bool on_wall = false;
    for (const auto& w : s.walls()) on_wall = on_wall || std::abs(inner<2>(x, w.normal)) <= 1e-9;
    std::vector<std::size_t> hits;
    for (std::size_t p = 0; p < s.pieces().size(); ++p) {
      bool in = true;
      for (const auto& [wid, side] : s.pieces()[p].bounding)
        in = in && side * inner<2>(x, s.walls()[s.wall_index(wid)].normal) > 0;
      if (in) hits.push_back(p);
    }
    const auto loc = locate(s, x);
    if (on_wall) {
      EXPECT_EQ(loc.kind, CellKind::wall);
      continue;
    }
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(loc.kind, CellKind::piece);
    EXPECT_EQ(loc.index, hits[0]);
  }
}

TEST(Stratification, LocateRefinementConsistency) {
  const auto s = gallery<3>("quad-spine-3d").complex();
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int k = 0; k < 500; ++k) {
    // Points near the stratum so the dead band matters.
    SpatialVector<3> y(U(rng), 1e-5 * U(rng), 1e-5 * U(rng));
    if (k % 2) y[2] = U(rng);
    const MinkVector<3> x = HyperboloidPoint<3>::from_spatial(y).vec();
    const auto coarse = locate(s, x, 1e-4), fine = locate(s, x, 1e-9);
    if (coarse.kind == CellKind::piece) {
      EXPECT_EQ(fine.kind, CellKind::piece);
      EXPECT_EQ(fine.index, coarse.index);
    }
    if (fine.kind == CellKind::piece && coarse.kind == CellKind::piece) EXPECT_EQ(fine.index, coarse.index);
    EXPECT_LE(coarse.dim, fine.dim);
  }
}

TEST(Stratification, WeightResiduals) {
  const auto s = gallery<3>("quad-spine-3d").complex();
  const auto w = weights_from_map(s, {{"P1", 1}, {"P2", 2}, {"P3", 1}, {"P4", 2}});
  EXPECT_LT(weight_residuals(s, w)[0].residual.norm(), 1e-15);
  const auto bad = weights_from_map(s, {{"P1", 1}, {"P2", 1}, {"P3", 1}, {"P4", 2}});
  EXPECT_NEAR(weight_residuals(s, bad)[0].residual.norm(), 1.0, 1e-12);

  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> U(0.1, 3);
  for (int k = 0; k < 50; ++k) {
    WeightFamily a{{U(rng), U(rng), U(rng), U(rng)}}, b{{U(rng), U(rng), U(rng), U(rng)}}, c{{0, 0, 0, 0}};
    for (int i = 0; i < 4; ++i) c.a[i] = a.a[i] + b.a[i];
    const auto ra = weight_residuals(s, a)[0].residual, rb = weight_residuals(s, b)[0].residual;
    EXPECT_LT((weight_residuals(s, c)[0].residual - ra - rb).norm(), 1e-14);
  }
}

TEST(Stratification, SolveWeights) {
  const auto n2 = gallery<2>("two-geodesics-2d").complex();
  const auto free = solve_weights(n2);
  EXPECT_EQ(free.cone_dimension, 2);
  ASSERT_TRUE(free.witness.has_value());

  const auto s = gallery<3>("quad-spine-3d").complex();
  const auto sol = solve_weights(s);
  ASSERT_TRUE(sol.witness.has_value());
  EXPECT_EQ(sol.cone_dimension, 2);
  EXPECT_TRUE(sol.dimension_bound_holds());
  const Eigen::VectorXd& a = *sol.witness;
  EXPECT_GT(a.minCoeff(), 0);
  EXPECT_NEAR(a[0], a[2], 1e-9);
  EXPECT_NEAR(a[1], a[3], 1e-9);
  WeightFamily w{{a[0], a[1], a[2], a[3]}};
  EXPECT_LT(max_weight_residual(s, w), 1e-9);
  // Nullspace is exactly {a1 = a3, a2 = a4}.
  for (int c = 0; c < sol.nullspace.cols(); ++c) {
    EXPECT_NEAR(sol.nullspace(0, c), sol.nullspace(2, c), 1e-12);
    EXPECT_NEAR(sol.nullspace(1, c), sol.nullspace(3, c), 1e-12);
  }
}

TEST(Stratification, InfeasibleStarGivesCertificate) {
  // Walls at 0, pi/2 and pi: the crossing normals only balance with a zero
  // weight on the middle wall.
  const double pi = std::numbers::pi;
  const auto s = star_scene({0.0, pi / 2, pi}).complex();
  ASSERT_TRUE(validate_complex(s).ok());
  const auto sol = solve_weights(s);
  EXPECT_FALSE(sol.witness.has_value());
  ASSERT_TRUE(sol.certificate.has_value());
  const Eigen::VectorXd& z = *sol.certificate;
  EXPECT_GE(z.minCoeff(), -1e-9);
  EXPECT_GT(z.norm(), 0.5);
  EXPECT_LT((sol.nullspace.transpose() * z).norm(), 1e-6);
}

TEST(Stratification, OctagonWeightsAreGroupInvariant) {
  const auto& sc = gallery<2>("octagon-multicurve-2d");
  const auto s = sc.complex();
  const auto& P = sc.group->presentation;
  int matched = 0;
  for (const auto& g : P.generators)
    for (std::size_t w = 0; w < s.walls().size(); ++w) {
      const MinkVector<2> v = g * s.walls()[w].normal;
      for (std::size_t u = 0; u < s.walls().size(); ++u)
        if ((s.walls()[u].normal - v).cwiseAbs().maxCoeff() < 1e-7 * std::max(1.0, v.cwiseAbs().maxCoeff()) ||
            (s.walls()[u].normal + v).cwiseAbs().maxCoeff() < 1e-7 * std::max(1.0, v.cwiseAbs().maxCoeff())) {
          EXPECT_EQ(sc.weights.at(s.walls()[u].id), sc.weights.at(s.walls()[w].id));
          ++matched;
        }
    }
  EXPECT_GT(matched, 50);
}

// ---------------------------------------------------------------------------

TEST(Measure, WallAtomExamples) {
  auto sc = gallery<2>("single-geodesic-2d");
  const auto s = sc.complex();
  EXPECT_EQ(wall_atom(s, WeightFamily{{1.0}}, "g", "minus"), unit<2>(2));
  EXPECT_EQ(wall_atom(s, WeightFamily{{1.0}}, "g", "plus"), MinkVector<2>(-unit<2>(2)));
  EXPECT_EQ(wall_atom(s, WeightFamily{{2.5}}, "g", "minus"), MinkVector<2>(2.5 * unit<2>(2)));
  const auto t = gallery<2>("two-geodesics-2d").complex();
  EXPECT_THROW(wall_atom(t, WeightFamily{{1.0, 1.0}}, "g1", "bottom"), ValidationError);
}

TEST(Measure, PathMeasureExamples) {
  const auto s = gallery<2>("single-geodesic-2d").complex();
  const WeightFamily w{{1.7}};
  const MinkVector<2> x = HyperboloidPoint<2>::from_spatial({0.3, -0.8}).vec();
  const MinkVector<2> y = HyperboloidPoint<2>::from_spatial({-0.1, 0.6}).vec();
  const auto pm = path_measure<2>(s, w, {x, y});
  ASSERT_EQ(pm.atoms.size(), 1u);
  EXPECT_LT((pm.total - 1.7 * unit<2>(2)).norm(), 1e-15);
  EXPECT_GT(norm2<2>(pm.atoms[0].vector), 0.0);

  const MinkVector<2> a = HyperboloidPoint<2>::from_spatial({0.2, -0.2}).vec();
  const MinkVector<2> b = HyperboloidPoint<2>::from_spatial({0.5, -0.2}).vec();
  const MinkVector<2> c = HyperboloidPoint<2>::from_spatial({0.5, -0.5}).vec();
  const MinkVector<2> d = HyperboloidPoint<2>::from_spatial({0.2, -0.5}).vec();
  EXPECT_EQ(path_measure<2>(s, w, {a, b, c, d, a}).total.norm(), 0.0);
  EXPECT_THROW(path_measure<2>(s, w, {x, unit<2>(0)}), ValidationError);
}

TEST(Measure, PathThroughSpine) {
  const auto s = gallery<3>("quad-spine-3d").complex();
  const auto w = weights_from_map(s, {{"P1", 1}, {"P2", 2}, {"P3", 1}, {"P4", 2}});
  const MinkVector<3> x = HyperboloidPoint<3>::from_spatial({0.3, -0.5, -0.5}).vec();
  const MinkVector<3> y = HyperboloidPoint<3>::from_spatial({0.3, 0.5, 0.5}).vec();
  const auto pm = path_measure<3>(s, w, {x, y});
  ASSERT_EQ(pm.atoms.size(), 1u);
  EXPECT_EQ(pm.atoms[0].kind, CellKind::spine);
  const MinkVector<3> expect = unit<3>(2) + 2.0 * unit<3>(3);
  EXPECT_LT((pm.total - expect).norm(), 1e-12);
  // The opposite way round the star: -(1 (-e2) + 2 (-e3)).
  EXPECT_LT((pm.total + (-unit<3>(2) - 2.0 * unit<3>(3))).norm(), 1e-12);
  // Detour through D2 gives the same total.
  const MinkVector<3> m = HyperboloidPoint<3>::from_spatial({0.3, 0.5, -0.5}).vec();
  EXPECT_LT((path_measure<3>(s, w, {x, m, y}).total - expect).norm(), 1e-12);
}

TEST(Measure, RhoExamples) {
  const auto s = gallery<2>("single-geodesic-2d").complex();
  const WeightFamily w{{1.0}};
  const std::size_t base = s.piece_index("minus");
  EXPECT_EQ(rho<2>(s, w, HyperboloidPoint<2>::from_spatial({0.4, -1.0}).vec(), base).norm(), 0.0);
  EXPECT_EQ(rho<2>(s, w, HyperboloidPoint<2>::from_spatial({0.4, 1.0}).vec(), base), unit<2>(2));
  EXPECT_THROW(rho<2>(s, w, unit<2>(0), base), ValidationError);

  // Two geodesics crossed in sequence: w1 u1 + w2 u2 with u the normals
  // pointing along the direction of travel.
  const auto t = gallery<2>("two-geodesics-2d").complex();
  const WeightFamily tw{{1.0, 0.5}};
  const MinkVector<2> top = HyperboloidPoint<2>::from_spatial({0.0, 3.0}).vec();
  const MinkVector<2> mid = HyperboloidPoint<2>::from_spatial({0.0, 0.0}).vec();
  const MinkVector<2> bot = HyperboloidPoint<2>::from_spatial({0.0, -3.0}).vec();
  const MinkVector<2> u1 = towards(t.walls()[0].normal, mid), u2 = towards(t.walls()[1].normal, bot);
  const std::size_t tb = t.piece_index("top");
  ASSERT_EQ(locate(t, top).index, tb);
  ASSERT_EQ(locate(t, bot).index, t.piece_index("bottom"));
  EXPECT_LT((rho<2>(t, tw, bot, tb) - (1.0 * u1 + 0.5 * u2)).norm(), 1e-12);
}

TEST(Measure, ClosedPathsVanish) {
  std::mt19937_64 rng(53);
  auto run = [&](const auto& s, const WeightFamily& w, double R, auto tag) {
    constexpr int N = decltype(tag)::value;
    int done = 0;
    for (int k = 0; k < 200; ++k) {
      std::vector<MinkVector<N>> poly;
      const int m = 3 + k % 5;
      for (int i = 0; i < m; ++i) poly.push_back(fixture::random_off_stratum<N>(s, rng, R));
      poly.push_back(poly.front());
      try {
        const auto pm = path_measure<N>(s, w, poly);
        EXPECT_LT(pm.total.cwiseAbs().maxCoeff(), 1e-9);
        ++done;
      } catch (const NumericError&) {
      }
    }
    EXPECT_GT(done, 190);
  };
  const auto oct = gallery<2>("octagon-multicurve-2d").complex();
  run(oct, WeightFamily{std::vector<double>(oct.walls().size(), 1.0)}, 2.0, std::integral_constant<int, 2>{});
  const auto q = gallery<3>("quad-spine-3d").complex();
  run(q, weights_from_map(q, {{"P1", 1}, {"P2", 2}, {"P3", 1}, {"P4", 2}}), 1.5, std::integral_constant<int, 3>{});
}

TEST(Measure, RhoMonotoneAndPieceConstant) {
  std::mt19937_64 rng(59);
  const auto& d = fixture::gallery_domain<2>("octagon-multicurve-2d");
  const auto& s = d.complex();
  for (int k = 0; k < 500; ++k) {
    const auto x = fixture::random_off_stratum<2>(s, rng, 3.0), y = fixture::random_off_stratum<2>(s, rng, 3.0);
    const MinkVector<2> rx = rho<2>(s, d.weights(), x, d.base()), ry = rho<2>(s, d.weights(), y, d.base());
    EXPECT_GE(inner<2>(MinkVector<2>(ry - rx), y), -1e-9);
    EXPECT_LE(inner<2>(MinkVector<2>(ry - rx), x), 1e-9);
    const bool same = locate(s, x).index == locate(s, y).index;
    EXPECT_EQ(same, (rx - ry).norm() < 1e-12);
  }
}

TEST(Measure, RhoEquivariance) {
  const auto& sc = gallery<2>("octagon-multicurve-2d");
  const auto& d = fixture::gallery_domain<2>("octagon-multicurve-2d");
  const auto& s = d.complex();
  const auto ball = extend_cocycle(sc.group->presentation, 2);
  std::mt19937_64 rng(61);
  int checked = 0;
  for (const auto& g : ball.elements) {
    for (int k = 0; k < 20; ++k) {
      const auto x = fixture::random_off_stratum<2>(s, rng, 1.5);
      const MinkVector<2> gx = g.linear * x;
      if (hyp_distance<2>(gx, unit<2>(0)) > sc.group->core_radius) continue;
      if (locate(s, gx).kind != CellKind::piece) continue;
      const MinkVector<2> lhs = rho<2>(s, d.weights(), gx, d.base());
      const MinkVector<2> rhs = g.linear * rho<2>(s, d.weights(), x, d.base()) + g.tau;
      EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
      ++checked;
    }
  }
  EXPECT_GT(checked, 100);
}
