#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "npsim/fields.hpp"
#include "npsim/grid.hpp"
#include "npsim/model.hpp"
#include "npsim/poisson.hpp"

namespace npsim::test {

inline Grid square(int n, double L = 1.0) { return Grid(2, {n, n, 1}, {L, L, 1.0}); }

inline std::vector<SpeciesSpec> ion_pair(double D1 = 1.0, double D2 = 1.0) {
  return {SpeciesSpec{"cation", 1.0, D1, SpeciesBc::Blocking, 0.0, {}},
          SpeciesSpec{"anion", -1.0, D2, SpeciesBc::Blocking, 0.0, {}}};
}

inline void randomize(std::span<double> v, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(lo, hi);
  for (auto& x : v) x = U(rng);
}

inline std::vector<double> random_values(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  randomize(v, seed, lo, hi);
  return v;
}

/// Potential from a Robin solve so the ghost layer is consistent.
inline ScalarField solved_potential(const Grid& g, std::span<const double> rho, std::span<const double> xi,
                                    double eps = 1.0, double tau = 1.0) {
  RobinPoissonSolver solver(g, eps, tau, Preconditioner::Separable, {20000, 1e-12});
  ScalarField phi(g);
  solver.solve(rho, xi, phi);
  return phi;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace npsim::test
