#pragma once

#include <optional>
#include <span>
#include <vector>

#include "npsim/fields.hpp"
#include "npsim/model.hpp"
#include "npsim/separable_solver.hpp"

namespace npsim {

struct LinearSolveControls {
  int max_iterations = 20000;
  double rtol = 1e-10;
};

/// -eps Lap(Phi) = rho in the box, dn(Phi) + tau Phi = xi on every wall.
struct RobinPoissonProblem {
  ScalarField rho;
  double epsilon = 1.0;
  double tau = 1.0;
  BoundaryData xi;
  LinearSolveControls controls;
};

enum class Preconditioner { Jacobi, Separable };

struct PoissonSolveInfo {
  int iterations = 0;
  /// max |-eps Lap_h Phi - rho| at exit.
  double residual = 0.0;
};

/// Ghost closure for the Robin wall: with the face value taken as the
/// midpoint (ghost + interior)/2 and the normal derivative as
/// (ghost - interior)/h, the relation dn(Phi) + tau Phi = xi is solved for the
/// ghost in closed form.
void fill_robin_ghosts(ScalarField& phi, std::span<const double> xi, double tau);

/// Cached discrete Robin-Poisson operator for repeated solves on one grid.
///
/// The matrix is the 5/7-point Laplacian scaled by eps with the Robin ghost
/// eliminated; it is symmetric positive definite for tau > 0. Solves use
/// preconditioned conjugate gradients, warm-started from the incoming Phi.
class RobinPoissonSolver {
 public:
  RobinPoissonSolver(const Grid& grid, double epsilon, double tau,
                     Preconditioner preconditioner = Preconditioner::Jacobi,
                     LinearSolveControls controls = {});

  /// Solves into `phi` (its interior is the initial guess) and fills ghosts.
  /// Throws SolverError carrying the final residual on non-convergence.
  PoissonSolveInfo solve(std::span<const double> rho, std::span<const double> xi, ScalarField& phi) const;

  /// Homogeneous operator y = A x (no xi contribution).
  void apply(std::span<const double> x, std::span<double> y) const;
  /// Right-hand side b = rho + boundary xi contribution, so A Phi = b.
  std::vector<double> rhs(std::span<const double> rho, std::span<const double> xi) const;
  /// max |-eps Lap_h Phi - rho| using the Robin closure with data xi.
  double residual_inf(std::span<const double> phi, std::span<const double> rho,
                      std::span<const double> xi) const;

  const Grid& grid() const noexcept { return grid_; }
  double epsilon() const noexcept { return epsilon_; }
  double tau() const noexcept { return tau_; }
  const LinearSolveControls& controls() const noexcept { return controls_; }

 private:
  Grid grid_;
  double epsilon_;
  double tau_;
  Preconditioner preconditioner_;
  LinearSolveControls controls_;
  std::optional<SeparableSolver> separable_;
  std::vector<double> diagonal_;
};

/// Solve with the default Jacobi-preconditioned CG starting from zero.
ScalarField solve_potential(const RobinPoissonProblem& problem, PoissonSolveInfo* info = nullptr);

/// rho = sum_i z_i c_i cellwise.
ScalarField charge_density(const SimState& state, std::span<const SpeciesSpec> species);

}  // namespace npsim
