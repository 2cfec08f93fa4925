#pragma once

// Minkowski bilinear algebra, the hyperboloid model of H^n and the
// classification of linear isometries of M^{n+1}.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "regdom/error.hpp"
#include "regdom/tolerances.hpp"

namespace regdom {

/// A vector of M^{n+1}; index 0 is the time coordinate.
template <int N>
using MinkVector = Eigen::Matrix<double, N + 1, 1>;

/// A linear map of M^{n+1}. Isometries are checked with lorentz_residual().
template <int N>
using LorentzMatrix = Eigen::Matrix<double, N + 1, N + 1>;

template <int N>
using SpatialVector = Eigen::Matrix<double, N, 1>;

template <int N>
inline double inner(const MinkVector<N>& u, const MinkVector<N>& v) {
  return -u[0] * v[0] + u.template tail<N>().dot(v.template tail<N>());
}

/// Runtime-sized variant used where dimensions come from input files.
inline double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size() || u.size() < 2) {
    throw ValidationError("inner: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()) + ")");
  }
  return -u[0] * v[0] + u.tail(u.size() - 1).dot(v.tail(v.size() - 1));
}

template <int N>
inline double norm2(const MinkVector<N>& v) {
  return inner<N>(v, v);
}

template <int N>
inline LorentzMatrix<N> eta() {
  LorentzMatrix<N> m = LorentzMatrix<N>::Identity();
  m(0, 0) = -1.0;
  return m;
}

template <int N>
inline MinkVector<N> unit(int i) {
  return MinkVector<N>::Unit(i);
}

enum class CausalType { spacelike, timelike, null, zero };
enum class TimeOrientation { future, past, none };

struct CausalClass {
  CausalType type;
  TimeOrientation orientation;
};

/// Sign of <v,v> with a tolerance relative to the Euclidean size of v.
template <int N>
inline CausalClass classify_vector(const MinkVector<N>& v, double eps = tol::hyperboloid) {
  const double e2 = v.squaredNorm();
  if (std::sqrt(e2) <= eps) return {CausalType::zero, TimeOrientation::none};
  const double q = norm2<N>(v);
  CausalType type = CausalType::null;
  if (q > eps * e2) type = CausalType::spacelike;
  else if (q < -eps * e2) type = CausalType::timelike;
  if (type == CausalType::spacelike) return {type, TimeOrientation::none};
  return {type, v[0] > 0 ? TimeOrientation::future : TimeOrientation::past};
}

/// A point of H^n = {<x,x> = -1, x_0 > 0}.
template <int N>
class HyperboloidPoint {
 public:
  HyperboloidPoint() : v_(unit<N>(0)) {}

  explicit HyperboloidPoint(const MinkVector<N>& v) : v_(v) {
    if (!(v[0] > 0) || std::abs(norm2<N>(v) + 1.0) > tol::hyperboloid * std::max(1.0, v[0] * v[0])) {
      std::ostringstream os;
      os << "not a hyperboloid point: <v,v> = " << norm2<N>(v) << ", v0 = " << v[0];
      throw ValidationError(os.str());
    }
  }

  /// Rescales a future timelike vector onto H^n.
  static HyperboloidPoint project(const MinkVector<N>& v) {
    const double q = norm2<N>(v);
    if (!(q < 0) || !(v[0] > 0)) throw NumericError("project: vector is not future timelike");
    HyperboloidPoint p;
    p.v_ = v / std::sqrt(-q);
    return p;
  }

  /// The point whose spatial coordinates are y.
  static HyperboloidPoint from_spatial(const SpatialVector<N>& y) {
    HyperboloidPoint p;
    p.v_[0] = std::sqrt(1.0 + y.squaredNorm());
    p.v_.template tail<N>() = y;
    return p;
  }

  /// Point at hyperbolic distance r from the origin in direction omega (|omega| = 1).
  static HyperboloidPoint polar(double r, const SpatialVector<N>& omega) {
    HyperboloidPoint p;
    p.v_[0] = std::cosh(r);
    p.v_.template tail<N>() = std::sinh(r) * omega;
    return p;
  }

  const MinkVector<N>& vec() const { return v_; }
  double operator[](int i) const { return v_[i]; }
  operator const MinkVector<N>&() const { return v_; }

 private:
  MinkVector<N> v_;
};

/// A point of the ideal boundary, stored with v_0 = 1.
template <int N>
class NullDirection {
 public:
  NullDirection() { v_.setZero(); v_[0] = 1.0; v_[1] = 1.0; }

  explicit NullDirection(const MinkVector<N>& v) {
    if (!(v[0] > 0)) throw ValidationError("null direction must be future directed");
    v_ = v / v[0];
    if (std::abs(norm2<N>(v_)) > 1e3 * tol::hyperboloid) {
      std::ostringstream os;
      os << "not a null vector: <v,v>/v0^2 = " << norm2<N>(v_);
      throw ValidationError(os.str());
    }
    // Re-project the spatial part onto the unit sphere.
    v_.template tail<N>().normalize();
  }

  static NullDirection from_sphere(const SpatialVector<N>& omega) {
    MinkVector<N> v;
    v[0] = 1.0;
    v.template tail<N>() = omega.normalized();
    return NullDirection(v);
  }

  const MinkVector<N>& vec() const { return v_; }
  SpatialVector<N> sphere() const { return v_.template tail<N>(); }
  operator const MinkVector<N>&() const { return v_; }

 private:
  MinkVector<N> v_;
};

/// Hyperbolic distance, computed as 2 asinh(|x-y|_L / 2) for accuracy at
/// short range (equal to arccosh(-<x,y>)).
template <int N>
inline double hyp_distance(const MinkVector<N>& x, const MinkVector<N>& y) {
  const MinkVector<N> d = x - y;
  const double chord2 = std::max(0.0, norm2<N>(d));
  return 2.0 * std::asinh(0.5 * std::sqrt(chord2));
}

template <int N>
inline double hyp_distance(const HyperboloidPoint<N>& x, const HyperboloidPoint<N>& y) {
  return hyp_distance<N>(x.vec(), y.vec());
}

/// Point at fraction s of the geodesic segment [x, y].
template <int N>
inline MinkVector<N> geodesic_lerp(const MinkVector<N>& x, const MinkVector<N>& y, double s) {
  const double d = hyp_distance<N>(x, y);
  if (d < 1e-14) return x;
  const double sd = std::sinh(d);
  return (std::sinh((1 - s) * d) / sd) * x + (std::sinh(s * d) / sd) * y;
}

/// Boost of rapidity t in the (e_0, e_axis) plane.
template <int N>
inline LorentzMatrix<N> boost(int axis, double t) {
  LorentzMatrix<N> m = LorentzMatrix<N>::Identity();
  m(0, 0) = m(axis, axis) = std::cosh(t);
  m(0, axis) = m(axis, 0) = std::sinh(t);
  return m;
}

/// Rotation by theta in the (e_i, e_j) plane, taking e_i towards e_j.
template <int N>
inline LorentzMatrix<N> rotation(int i, int j, double theta) {
  LorentzMatrix<N> m = LorentzMatrix<N>::Identity();
  m(i, i) = m(j, j) = std::cos(theta);
  m(j, i) = std::sin(theta);
  m(i, j) = -std::sin(theta);
  return m;
}

template <int N>
inline LorentzMatrix<N> lorentz_inverse(const LorentzMatrix<N>& g) {
  return eta<N>() * g.transpose() * eta<N>();
}

/// max |g^T eta g - eta|, relative to max(1, |g|^2).
template <int N>
inline double lorentz_residual(const LorentzMatrix<N>& g) {
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  return (g.transpose() * eta<N>() * g - eta<N>()).cwiseAbs().maxCoeff() / (scale * scale);
}

/// Checks membership in SO^+(n,1): isometry, det = +1, g_00 > 0.
template <int N>
inline bool is_orthochronous_isometry(const LorentzMatrix<N>& g, double eps = tol::group) {
  return lorentz_residual<N>(g) <= eps && g(0, 0) > 0 && std::abs(g.determinant() - 1.0) <= 1e3 * eps;
}

enum class IsometryClass { elliptic, parabolic, hyperbolic };

inline const char* to_string(IsometryClass c) {
  switch (c) {
    case IsometryClass::elliptic: return "elliptic";
    case IsometryClass::parabolic: return "parabolic";
    case IsometryClass::hyperbolic: return "hyperbolic";
  }
  return "?";
}

template <int N>
struct IsometryInfo {
  IsometryClass kind = IsometryClass::elliptic;
  double lambda = 1.0;                              // largest eigenvalue when hyperbolic
  std::optional<NullDirection<N>> attracting;       // eigenvalue lambda
  std::optional<NullDirection<N>> repelling;        // eigenvalue 1/lambda
  std::optional<NullDirection<N>> fixed_null;       // parabolic fixed point
  std::optional<HyperboloidPoint<N>> fixed_point;   // elliptic fixed point
  double residual = 0.0;                            // worst eigenvector residual
};

namespace detail {

// Unit vector minimising |A v|, with its residual.
template <int N>
inline std::pair<MinkVector<N>, double> smallest_singular(const LorentzMatrix<N>& a) {
  Eigen::JacobiSVD<LorentzMatrix<N>> svd(a, Eigen::ComputeFullV);
  MinkVector<N> v = svd.matrixV().col(N);
  return {v, (a * v).norm()};
}

template <int N>
inline NullDirection<N> as_null(MinkVector<N> v) {
  if (v[0] < 0) v = -v;
  return NullDirection<N>(v);
}

}  // namespace detail

/// Classifies g in SO^+(n,1). Elliptic iff ker(g - I) contains a timelike
/// vector; otherwise hyperbolic iff the largest eigenvalue of g + g^{-1}
/// exceeds 2; parabolic otherwise.
template <int N>
IsometryInfo<N> classify_isometry(const LorentzMatrix<N>& g) {
  if (lorentz_residual<N>(g) > tol::group) {
    std::ostringstream os;
    os << "classify_isometry: not a Lorentz isometry (residual " << lorentz_residual<N>(g) << ")";
    throw ValidationError(os.str());
  }
  IsometryInfo<N> info;
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  const LorentzMatrix<N> id = LorentzMatrix<N>::Identity();

  // Fixed subspace of g.
  Eigen::JacobiSVD<LorentzMatrix<N>> svd(g - id, Eigen::ComputeFullV);
  const auto sv = svd.singularValues();
  int k = 0;
  for (int i = 0; i <= N; ++i)
    if (sv[i] <= 1e-7 * scale) ++k;
  if (k > 0) {
    const Eigen::MatrixXd basis = svd.matrixV().rightCols(k);
    const Eigen::MatrixXd gram = basis.transpose() * eta<N>() * basis;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    if (es.eigenvalues()[0] < -1e-9) {
      MinkVector<N> x = basis * es.eigenvectors().col(0);
      if (x[0] < 0) x = -x;
      info.kind = IsometryClass::elliptic;
      info.fixed_point = HyperboloidPoint<N>::project(x);
      info.residual = (g * info.fixed_point->vec() - info.fixed_point->vec()).norm();
      return info;
    }
  }

  const LorentzMatrix<N> s = g + lorentz_inverse<N>(g);
  Eigen::EigenSolver<LorentzMatrix<N>> es(s, false);
  double mu = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= N; ++i) mu = std::max(mu, es.eigenvalues()[i].real());

  if (mu > 2.0 + 1e-7 * scale) {
    const double ell = std::acosh(0.5 * mu);
    info.kind = IsometryClass::hyperbolic;
    info.lambda = std::exp(ell);
    auto [up, rp] = detail::smallest_singular<N>(g - info.lambda * id);
    auto [um, rm] = detail::smallest_singular<N>(g - (1.0 / info.lambda) * id);
    info.residual = std::max(rp, rm);
    if (info.residual > 1e-6 * scale) {
      std::ostringstream os;
      os << "classify_isometry: ill-conditioned axis eigenvectors (residuals " << rp << ", " << rm << ")";
      throw NumericError(os.str());
    }
    info.attracting = detail::as_null<N>(up);
    info.repelling = detail::as_null<N>(um);
    return info;
  }

  info.kind = IsometryClass::parabolic;
  if (k > 0) {
    const Eigen::MatrixXd basis = svd.matrixV().rightCols(k);
    const Eigen::MatrixXd gram = basis.transpose() * eta<N>() * basis;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gs(gram);
    MinkVector<N> u = basis * gs.eigenvectors().col(0);
    if (std::abs(u[0]) > 1e-12) {
      info.fixed_null = detail::as_null<N>(u[0] < 0 ? MinkVector<N>(-u) : u);
      info.residual = (g * info.fixed_null->vec() - info.fixed_null->vec()).norm();
    }
  }
  return info;
}

/// Translation length of a hyperbolic isometry, log(lambda).
template <int N>
double translation_length_hyp(const LorentzMatrix<N>& g) {
  const auto info = classify_isometry<N>(g);
  if (info.kind != IsometryClass::hyperbolic)
    throw ValidationError(std::string("translation_length_hyp: isometry is ") + to_string(info.kind));
  return std::log(info.lambda);
}

template <int N>
struct FixedPointReport {
  std::optional<MinkVector<N>> z;  // fixed point of x -> g x + t
  double det = 0.0;                // det(g - I)
  double rcond = 0.0;              // reciprocal condition estimate of g - I
};

/// Affine fixed point of x -> g x + t, i.e. z = -(g - I)^{-1} t, when 1 is not
/// an eigenvalue of g.
template <int N>
FixedPointReport<N> loxodromic_fixed_point(const LorentzMatrix<N>& g, const MinkVector<N>& t) {
  FixedPointReport<N> rep;
  const LorentzMatrix<N> a = g - LorentzMatrix<N>::Identity();
  Eigen::FullPivLU<LorentzMatrix<N>> lu(a);
  rep.det = a.determinant();
  rep.rcond = lu.rcond();
  if (std::abs(rep.det) <= tol::loxodromic || rep.rcond < 1e-12) return rep;
  rep.z = lu.solve(-t);
  return rep;
}

/// Orthonormal basis of the Lorentz-orthogonal complement of span(u1, u2)
/// for two distinct null directions (a spacelike (n-1)-plane).
template <int N>
Eigen::Matrix<double, N + 1, N - 1> null_pair_complement(const MinkVector<N>& u1, const MinkVector<N>& u2) {
  const double c = inner<N>(u1, u2);
  if (std::abs(c) < 1e-14) throw NumericError("null_pair_complement: coincident null directions");
  Eigen::Matrix<double, N + 1, N - 1> basis;
  int found = 0;
  for (int i = 0; i <= N && found < N - 1; ++i) {
    MinkVector<N> x = unit<N>(i);
    x -= (inner<N>(x, u2) / c) * u1 + (inner<N>(x, u1) / c) * u2;
    for (int j = 0; j < found; ++j) x -= inner<N>(x, basis.col(j)) * MinkVector<N>(basis.col(j));
    const double q = norm2<N>(x);
    if (q > 1e-6) basis.col(found++) = x / std::sqrt(q);
  }
  if (found < N - 1) throw NumericError("null_pair_complement: degenerate basis");
  return basis;
}

/// Unit spacelike normal of the totally geodesic hyperplane of H^2 with
/// ideal endpoints u1, u2 (n = 2 only); orientation follows u1 x u2.
inline MinkVector<2> geodesic_normal(const MinkVector<2>& u1, const MinkVector<2>& u2) {
  return null_pair_complement<2>(u1, u2).col(0);
}

/// Ideal endpoints of the wall {<x, v> = 0} in H^2 (v spacelike unit).
inline std::pair<NullDirection<2>, NullDirection<2>> geodesic_endpoints(const MinkVector<2>& v) {
  // Solve -v0 + v1 cos(th) + v2 sin(th) = 0.
  const double r = std::hypot(v[1], v[2]);
  const double phi = std::atan2(v[2], v[1]);
  const double c = std::clamp(v[0] / r, -1.0, 1.0);
  const double delta = std::acos(c);
  SpatialVector<2> a(std::cos(phi - delta), std::sin(phi - delta));
  SpatialVector<2> b(std::cos(phi + delta), std::sin(phi + delta));
  return {NullDirection<2>::from_sphere(a), NullDirection<2>::from_sphere(b)};
}

}  // namespace regdom
