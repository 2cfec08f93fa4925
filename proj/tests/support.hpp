#pragma once

// Shared fixtures and brute-force oracles for the test suites.

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "regdom/gallery.hpp"

namespace regdom::fixture {

inline std::string sample_path(const std::string& name) { return std::string(REGDOM_SAMPLES_DIR) + "/" + name + ".json"; }

template <int N>
const Scene<N>& gallery(const std::string& name) {
  static std::map<std::string, Scene<N>> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, std::get<Scene<N>>(gallery_scene(name))).first;
  return it->second;
}

template <int N>
const RegularDomain<N>& gallery_domain(const std::string& name) {
  static std::map<std::string, RegularDomain<N>> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, gallery<N>(name).domain()).first;
  return it->second;
}

/// Uniform spatial point in the box [-R, R]^n lifted to H^n.
template <int N>
MinkVector<N> random_point(std::mt19937_64& rng, double R) {
  std::uniform_real_distribution<double> U(-R, R);
  SpatialVector<N> y;
  for (int i = 0; i < N; ++i) y[i] = U(rng);
  return HyperboloidPoint<N>::from_spatial(y).vec();
}

template <int N>
MinkVector<N> random_off_stratum(const StratComplex<N>& s, std::mt19937_64& rng, double R) {
  for (;;) {
    MinkVector<N> x = random_point<N>(rng, R);
    if (locate(s, x, 1e-6).kind == CellKind::piece) return x;
  }
}

/// Random point of the domain: a level point above a random x, pushed up a
/// random future timelike step.
template <int N>
MinkVector<N> random_interior(const RegularDomain<N>& d, std::mt19937_64& rng, double R = 1.5) {
  std::uniform_real_distribution<double> U(0.1, 2.0);
  const MinkVector<N> x = random_off_stratum<N>(d.complex(), rng, R);
  return d.level_point(U(rng), x);
}

template <int N>
MinkVector<N> random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> G;
  MinkVector<N> u;
  for (int i = 0; i <= N; ++i) u[i] = G(rng);
  return u.normalized();
}

/// Boost along axis 1 composed with a rotation in the (2,3) plane (n = 3).
inline LorentzMatrix<3> loxodromic(double t, double theta) {
  return boost<3>(1, t) * rotation<3>(2, 3, theta);
}

}  // namespace regdom::fixture
