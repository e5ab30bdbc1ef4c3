#include "npsim/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "npsim/errors.hpp"

namespace npsim {
namespace {

// Visit every face normal to `axis` as (index, position triple).
template <class Fn>
void for_each_face(const Grid& g, int axis, Fn&& fn) {
  std::array<int, 3> ext = g.cells();
  ext[axis] += 1;
  for (int k = 0; k < ext[2]; ++k) {
    for (int j = 0; j < ext[1]; ++j) {
      for (int i = 0; i < ext[0]; ++i) {
        const std::array<int, 3> pos{i, j, k};
        fn(g.face_index(axis, i, j, k), pos);
      }
    }
  }
}

double kinetic_energy(const StaggeredVectorField& u) { return 0.5 * velocity_gradient_norms(u).l2_sq; }

}  // namespace

StaggeredVectorField electric_force(const ScalarField& rho, const ScalarField& phi, double K) {
  const Grid& g = phi.grid();
  StaggeredVectorField f(g);
  for (int a = 0; a < g.dim(); ++a) {
    auto fa = f.component(a);
    const double h = g.spacing(a);
    const std::size_t st = g.stride(a);
    for_each_face(g, a, [&](std::size_t idx, const std::array<int, 3>& pos) {
      if (pos[a] == 0 || pos[a] == g.cells(a)) return;
      std::array<int, 3> lo = pos;
      lo[a] -= 1;
      const std::size_t p = g.index(lo[0], lo[1], lo[2]);
      const std::size_t e = p + st;
      fa[idx] = -K * 0.5 * (rho[p] + rho[e]) * (phi[e] - phi[p]) / h;
    });
  }
  return f;
}

FluidSolver::FluidSolver(const Grid& grid, const PhysicalParams& params, double div_tol)
    : grid_(grid), params_(params), div_tol_(div_tol), pressure_(grid, 1.0, {0.0, 0.0, 0.0}) {}

double FluidSolver::dt_limit(const StaggeredVectorField& u) const {
  double rate = 0.0;
  for (int a = 0; a < grid_.dim(); ++a) {
    const double h = grid_.spacing(a);
    rate += 2.0 * params_.nu / (h * h);
    if (params_.fluid_model == FluidModel::NPNS) {
      double umax = 0.0;
      for (double v : u.component(a)) umax = std::max(umax, std::abs(v));
      rate += umax / h;
    }
  }
  return 1.0 / rate;
}

int FluidSolver::project(StaggeredVectorField& u, ScalarField& p, double dt) const {
  const std::size_t n = grid_.cell_count();
  std::vector<double> rhs(n);
  std::vector<double> phi(n);
  std::fill(p.interior().begin(), p.interior().end(), 0.0);
  int passes = 0;
  // A second pass only mops up rounding from the first.
  for (; passes < 3; ++passes) {
    const auto div = u.divergence();
    double dmax = 0.0;
    for (double d : div) dmax = std::max(dmax, std::abs(d));
    if (passes > 0 && dmax <= 0.1 * div_tol_) break;
    for (std::size_t c = 0; c < n; ++c) rhs[c] = -div[c] / dt;
    pressure_.solve(rhs, phi);
    for (int a = 0; a < grid_.dim(); ++a) {
      auto ua = u.component(a);
      const double h = grid_.spacing(a);
      const std::size_t st = grid_.stride(a);
      for_each_face(grid_, a, [&](std::size_t idx, const std::array<int, 3>& pos) {
        if (pos[a] == 0 || pos[a] == grid_.cells(a)) return;
        std::array<int, 3> lo = pos;
        lo[a] -= 1;
        const std::size_t cp = grid_.index(lo[0], lo[1], lo[2]);
        ua[idx] -= dt * (phi[cp + st] - phi[cp]) / h;
      });
    }
    for (std::size_t c = 0; c < n; ++c) p[c] += phi[c];
  }
  double mean = 0.0;
  for (std::size_t c = 0; c < n; ++c) mean += p[c];
  mean /= static_cast<double>(n);
  for (std::size_t c = 0; c < n; ++c) p[c] -= mean;
  fill_neumann_ghosts(p);
  return passes;
}

FluidStepReport FluidSolver::step(StaggeredVectorField& u, ScalarField& p, const StaggeredVectorField& force,
                                  double dt) const {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive", "run.dt");
  const double limit = dt_limit(u);
  if (dt > limit) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "fluid time step " << dt << " exceeds the viscous/advective limit " << limit << "; suggested dt "
        << 0.9 * limit;
    throw InvariantViolation("fluid_solver", msg.str());
  }
  FluidStepReport report;
  report.kinetic_energy_before = kinetic_energy(u);

  const auto& n = grid_.cells();
  const bool advect = params_.fluid_model == FluidModel::NPNS;
  StaggeredVectorField next(grid_);
  for (int a = 0; a < grid_.dim(); ++a) {
    const auto ua = u.component(a);
    const auto fa = force.component(a);
    auto out = next.component(a);
    const double ha = grid_.spacing(a);
    const std::size_t sa = grid_.face_stride(a, a);
    for_each_face(grid_, a, [&](std::size_t idx, const std::array<int, 3>& pos) {
      if (pos[a] == 0 || pos[a] == n[a]) {
        out[idx] = 0.0;
        return;
      }
      const double uc = ua[idx];
      double lap = (ua[idx + sa] - 2.0 * uc + ua[idx - sa]) / (ha * ha);
      double adv = 0.0;
      if (advect) {
        adv += uc * (uc >= 0.0 ? (uc - ua[idx - sa]) : (ua[idx + sa] - uc)) / ha;
      }
      for (int b = 0; b < grid_.dim(); ++b) {
        if (b == a) continue;
        const double hb = grid_.spacing(b);
        const std::size_t sb = grid_.face_stride(a, b);
        const double lo = pos[b] == 0 ? -uc : ua[idx - sb];
        const double hi = pos[b] == n[b] - 1 ? -uc : ua[idx + sb];
        lap += (hi - 2.0 * uc + lo) / (hb * hb);
        if (advect) {
          // Transverse velocity averaged from the four surrounding b-faces.
          const auto ub = u.component(b);
          std::array<int, 3> q = pos;
          q[a] -= 1;
          const std::size_t w0 = grid_.face_index(b, q[0], q[1], q[2]);
          const std::size_t sbb = grid_.face_stride(b, b);
          std::array<int, 3> r = pos;
          const std::size_t e0 = grid_.face_index(b, r[0], r[1], r[2]);
          const double vb = 0.25 * (ub[w0] + ub[w0 + sbb] + ub[e0] + ub[e0 + sbb]);
          adv += vb * (vb >= 0.0 ? (uc - lo) : (hi - uc)) / hb;
        }
      }
      out[idx] = uc + dt * (params_.nu * lap - adv + fa[idx]);
    });
  }
  report.divergence_before = next.max_abs_divergence();
  report.pressure_iterations = project(next, p, dt);
  report.divergence_after = next.max_abs_divergence();
  if (!(report.divergence_after <= div_tol_)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "projection left max |div u| = " << report.divergence_after << " above " << div_tol_;
    throw SolverError("fluid_solver", msg.str(), report.divergence_after, report.pressure_iterations);
  }
  u = std::move(next);
  report.kinetic_energy_after = kinetic_energy(u);
  return report;
}

FluidStepReport fluid_step(SimState& state, const FluidSolver& solver, const PhysicalParams& params,
                           const StaggeredVectorField& force, double dt) {
  if (params.fluid_model == FluidModel::Frozen) {
    FluidStepReport r;
    r.kinetic_energy_before = r.kinetic_energy_after = kinetic_energy(state.velocity);
    r.divergence_before = r.divergence_after = state.velocity.max_abs_divergence();
    return r;
  }
  return solver.step(state.velocity, state.pressure, force, dt);
}

VelocityNorms velocity_gradient_norms(const StaggeredVectorField& u) {
  const Grid& g = u.grid();
  const auto& n = g.cells();
  const double vol = g.cell_volume();
  VelocityNorms out;
  for (int a = 0; a < g.dim(); ++a) {
    const auto ua = u.component(a);
    const double ha = g.spacing(a);
    const std::size_t sa = g.face_stride(a, a);
    for_each_face(g, a, [&](std::size_t idx, const std::array<int, 3>& pos) {
      const bool wall_normal = pos[a] == 0 || pos[a] == n[a];
      const double w = wall_normal ? 0.5 : 1.0;
      const double v = ua[idx];
      out.l2_sq += w * v * v * vol;
      if (pos[a] < n[a]) {
        const double d = (ua[idx + sa] - v) / ha;
        out.grad_sq += d * d * vol;
      }
      for (int b = 0; b < g.dim(); ++b) {
        if (b == a) continue;
        const double hb = g.spacing(b);
        const std::size_t sb = g.face_stride(a, b);
        if (pos[b] < n[b] - 1) {
          const double d = (ua[idx + sb] - v) / hb;
          out.grad_sq += w * d * d * vol;
        }
        // Reflected ghost across the wall: difference 2v over h, half volume.
        if (pos[b] == 0 || pos[b] == n[b] - 1) {
          const double d = 2.0 * v / hb;
          out.grad_sq += 0.5 * w * d * d * vol;
        }
      }
    });
  }
  return out;
}

}  // namespace npsim
