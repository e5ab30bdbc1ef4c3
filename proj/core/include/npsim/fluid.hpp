#pragma once

#include "npsim/fields.hpp"
#include "npsim/model.hpp"
#include "npsim/separable_solver.hpp"

namespace npsim {

/// Face-centred electrical body force -K rho_face (Phi_E - Phi_P)/h with
/// rho_face the arithmetic mean of the two cells. Wall faces carry no force.
StaggeredVectorField electric_force(const ScalarField& rho, const ScalarField& phi, double K);

struct FluidStepReport {
  double divergence_before = 0.0;  ///< max |div u*| before projection
  double divergence_after = 0.0;   ///< max |div u| after projection
  int pressure_iterations = 0;
  double kinetic_energy_before = 0.0;  ///< (1/2)||u||^2
  double kinetic_energy_after = 0.0;
};

/// Explicit Stokes / Navier-Stokes step on the MAC grid followed by a
/// Chorin projection.
///
/// Viscosity uses the face Laplacian; tangential neighbours across a wall are
/// reflected ghosts (u_ghost = -u) so the wall value is zero, and wall-normal
/// faces are held at zero. The pressure solve is the homogeneous-Neumann cell
/// Laplacian, which is exactly div(grad) on this stencil; the pressure is
/// returned with zero mean.
class FluidSolver {
 public:
  FluidSolver(const Grid& grid, const PhysicalParams& params, double div_tol = 1e-10);

  FluidStepReport step(StaggeredVectorField& u, ScalarField& p, const StaggeredVectorField& force,
                       double dt) const;

  /// Remove the gradient part of u in place; returns the pressure-like
  /// potential and the number of correction passes.
  int project(StaggeredVectorField& u, ScalarField& p, double dt) const;

  /// Hard limit on dt: 1 / sum_a (2 nu / h_a^2 [+ max|u_a| / h_a for NPNS]).
  double dt_limit(const StaggeredVectorField& u) const;
  /// 0.9 x dt_limit.
  double stable_dt(const StaggeredVectorField& u) const { return 0.9 * dt_limit(u); }

  double div_tol() const noexcept { return div_tol_; }

 private:
  Grid grid_;
  PhysicalParams params_;
  double div_tol_;
  SeparableSolver pressure_;
};

/// Convenience wrapper: steps state.velocity / state.pressure unless the
/// fluid model is Frozen, in which case u is left untouched.
FluidStepReport fluid_step(SimState& state, const FluidSolver& solver, const PhysicalParams& params,
                           const StaggeredVectorField& force, double dt);

struct VelocityNorms {
  double grad_sq = 0.0;  ///< ||grad u||^2, the squared V norm
  double l2_sq = 0.0;    ///< ||u||^2
};

/// Discrete Dirichlet seminorm and L2 norm of a MAC field. Tangential
/// differences to the wall use the reflected ghost over half a control
/// volume, matching the viscous stencil so that <u, -Lap_h u> = ||grad u||^2.
VelocityNorms velocity_gradient_norms(const StaggeredVectorField& u);

/// Running U(T) = int_0^T ||u||_V^4 dt by the rectangle rule.
class RegularityMonitor {
 public:
  void accumulate(double grad_sq, double dt) noexcept { value_ += dt * grad_sq * grad_sq; }
  double value() const noexcept { return value_; }
  void reset(double value = 0.0) noexcept { value_ = value; }

 private:
  double value_ = 0.0;
};

}  // namespace npsim
