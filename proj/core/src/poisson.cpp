#include "npsim/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "npsim/errors.hpp"

namespace npsim {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Robin end shift in units of eps/h^2: tau h / (1 + tau h / 2).
double robin_shift(double tau, double h) { return tau * h / (1.0 + 0.5 * tau * h); }

}  // namespace

void fill_robin_ghosts(ScalarField& phi, std::span<const double> xi, double tau) {
  const Grid& g = phi.grid();
  const auto faces = g.boundary_faces();
  auto ghosts = phi.ghosts();
  for (std::size_t b = 0; b < faces.size(); ++b) {
    const double h = g.spacing(faces[b].axis);
    const double inner = phi[faces[b].cell];
    const double face = (inner + 0.5 * h * xi[b]) / (1.0 + 0.5 * tau * h);
    ghosts[b] = 2.0 * face - inner;
  }
  phi.set_ghosts_ready(true);
}

RobinPoissonSolver::RobinPoissonSolver(const Grid& grid, double epsilon, double tau,
                                       Preconditioner preconditioner, LinearSolveControls controls)
    : grid_(grid), epsilon_(epsilon), tau_(tau), preconditioner_(preconditioner), controls_(controls) {
  if (!(tau > 0.0)) {
    throw ConfigError("Robin capacitance tau must be > 0 for a unique potential", "params.tau");
  }
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0", "params.epsilon");
  if (!(controls_.rtol > 0.0)) throw ConfigError("solver tolerance must be > 0", "rtol");

  std::array<double, 3> shift{};
  for (int a = 0; a < grid_.dim(); ++a) shift[a] = robin_shift(tau_, grid_.spacing(a));

  diagonal_.assign(grid_.cell_count(), 0.0);
  for (std::size_t c = 0; c < grid_.cell_count(); ++c) {
    const auto ijk = grid_.coords(c);
    for (int a = 0; a < grid_.dim(); ++a) {
      const double s = epsilon_ / (grid_.spacing(a) * grid_.spacing(a));
      double d = 2.0 * s;
      if (ijk[a] == 0) d += (shift[a] - 1.0) * s;
      if (ijk[a] == grid_.cells(a) - 1) d += (shift[a] - 1.0) * s;
      diagonal_[c] += d;
    }
  }
  if (preconditioner_ == Preconditioner::Separable) separable_.emplace(grid_, epsilon_, shift);
}

void RobinPoissonSolver::apply(std::span<const double> x, std::span<double> y) const {
  const auto& n = grid_.cells();
  for (int k = 0; k < n[2]; ++k) {
    for (int j = 0; j < n[1]; ++j) {
      for (int i = 0; i < n[0]; ++i) {
        const std::size_t c = grid_.index(i, j, k);
        const std::array<int, 3> pos{i, j, k};
        double v = diagonal_[c] * x[c];
        for (int a = 0; a < grid_.dim(); ++a) {
          const double s = epsilon_ / (grid_.spacing(a) * grid_.spacing(a));
          const std::size_t st = grid_.stride(a);
          if (pos[a] > 0) v -= s * x[c - st];
          if (pos[a] < n[a] - 1) v -= s * x[c + st];
        }
        y[c] = v;
      }
    }
  }
}

std::vector<double> RobinPoissonSolver::rhs(std::span<const double> rho, std::span<const double> xi) const {
  std::vector<double> b(rho.begin(), rho.begin() + grid_.cell_count());
  const auto faces = grid_.boundary_faces();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const double h = grid_.spacing(faces[f].axis);
    b[faces[f].cell] += epsilon_ * xi[f] / (h * (1.0 + 0.5 * tau_ * h));
  }
  return b;
}

double RobinPoissonSolver::residual_inf(std::span<const double> phi, std::span<const double> rho,
                                        std::span<const double> xi) const {
  const auto b = rhs(rho, xi);
  std::vector<double> ax(grid_.cell_count());
  apply(phi, ax);
  double m = 0.0;
  for (std::size_t c = 0; c < ax.size(); ++c) m = std::max(m, std::abs(ax[c] - b[c]));
  return m;
}

PoissonSolveInfo RobinPoissonSolver::solve(std::span<const double> rho, std::span<const double> xi,
                                           ScalarField& phi) const {
  const std::size_t n = grid_.cell_count();
  if (xi.size() != grid_.boundary_face_count()) {
    throw ConfigError("xi needs one value per boundary face", "boundary.xi");
  }
  for (std::size_t c = 0; c < n; ++c) {
    if (!std::isfinite(rho[c])) {
      throw InvariantViolation("poisson_robin", "charge density is not finite at cell " + std::to_string(c));
    }
  }
  const auto b = rhs(rho, xi);
  const double tol = controls_.rtol * (1.0 + max_abs(rho.subspan(0, n)));

  auto x = phi.interior();
  std::vector<double> r(n), z(n), p(n), ap(n);
  auto precondition = [&](std::span<const double> in, std::span<double> out) {
    if (separable_) {
      separable_->solve(in, out);
    } else {
      for (std::size_t c = 0; c < n; ++c) out[c] = in[c] / diagonal_[c];
    }
  };
  auto true_residual = [&]() {
    apply(x, ap);
    for (std::size_t c = 0; c < n; ++c) r[c] = b[c] - ap[c];
    return max_abs(r);
  };

  PoissonSolveInfo info;
  double res = true_residual();
  while (res > tol && info.iterations < controls_.max_iterations) {
    precondition(r, z);
    std::copy(z.begin(), z.end(), p.begin());
    double rz = dot(r, z);
    // Inner CG sweep; leaves on convergence of the recursive residual, then the
    // true residual is recomputed to guard against drift.
    while (info.iterations < controls_.max_iterations) {
      apply(p, ap);
      const double pap = dot(p, ap);
      if (!(pap > 0.0)) break;
      const double alpha = rz / pap;
      for (std::size_t c = 0; c < n; ++c) {
        x[c] += alpha * p[c];
        r[c] -= alpha * ap[c];
      }
      ++info.iterations;
      if (max_abs(r) <= 0.5 * tol) break;
      precondition(r, z);
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t c = 0; c < n; ++c) p[c] = z[c] + beta * p[c];
    }
    const double prev = res;
    res = true_residual();
    if (!(res < prev) && res > tol) break;
  }
  info.residual = res;
  if (!(res <= tol)) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "Robin-Poisson solve did not converge: residual %.3e (tolerance %.3e) after %d iterations",
                  res, tol, info.iterations);
    throw SolverError("poisson_robin", msg, res, info.iterations);
  }
  fill_robin_ghosts(phi, xi, tau_);
  return info;
}

ScalarField solve_potential(const RobinPoissonProblem& problem, PoissonSolveInfo* info) {
  RobinPoissonSolver solver(problem.rho.grid(), problem.epsilon, problem.tau, Preconditioner::Jacobi,
                            problem.controls);
  ScalarField phi(problem.rho.grid(), 0.0);
  const auto result = solver.solve(problem.rho.interior(), problem.xi.xi, phi);
  if (info) *info = result;
  return phi;
}

ScalarField charge_density(const SimState& state, std::span<const SpeciesSpec> species) {
  if (species.size() != state.concentrations.size()) {
    throw ConfigError("charge_density: " + std::to_string(species.size()) + " species specs for " +
                      std::to_string(state.concentrations.size()) + " concentration fields");
  }
  ScalarField rho(state.grid(), 0.0);
  for (std::size_t s = 0; s < species.size(); ++s) {
    const auto c = state.concentrations[s].interior();
    auto out = rho.interior();
    for (std::size_t i = 0; i < c.size(); ++i) out[i] += species[s].valence * c[i];
  }
  return rho;
}

}  // namespace npsim
