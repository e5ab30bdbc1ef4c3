#include "npsim/nernst_planck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "npsim/errors.hpp"

namespace npsim {
namespace {

// B(d) and B(-d) evaluated from |d| so neither branch cancels.
inline void bernoulli_pair(double d, double& b_plus, double& b_minus) noexcept {
  const double b = bernoulli(std::abs(d));
  if (d >= 0.0) {
    b_plus = b;
    b_minus = b + d;
  } else {
    b_minus = b;
    b_plus = b - d;
  }
}

template <class Fn>
void for_each_interior_face(const Grid& g, int axis, Fn&& fn) {
  const auto& n = g.cells();
  const std::size_t st = g.stride(axis);
  for (int k = 0; k < n[2]; ++k) {
    for (int j = 0; j < n[1]; ++j) {
      for (int i = 0; i < n[0]; ++i) {
        std::array<int, 3> pos{i, j, k};
        if (pos[axis] == n[axis] - 1) continue;
        const std::size_t c = g.index(i, j, k);
        pos[axis] += 1;
        fn(c, c + st, g.face_index(axis, pos[0], pos[1], pos[2]));
      }
    }
  }
}

std::size_t boundary_staggered_face(const Grid& g, const BoundaryFace& f) {
  auto ijk = g.coords(f.cell);
  if (f.side > 0) ijk[f.axis] += 1;
  return g.face_index(f.axis, ijk[0], ijk[1], ijk[2]);
}

}  // namespace

double bernoulli(double x) noexcept {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - 0.5 * x + x2 / 12.0 - x2 * x2 / 720.0;
  }
  return x / std::expm1(x);
}

double electro_diffusive_face_flux(double c_p, double c_e, double dphi, double z, double D,
                                   double h) noexcept {
  double bp = 0.0;
  double bm = 0.0;
  bernoulli_pair(z * dphi, bp, bm);
  return (D / h) * (bp * c_p - bm * c_e);
}

double advective_face_flux(double c_p, double c_e, double u_face) noexcept {
  return u_face >= 0.0 ? u_face * c_p : u_face * c_e;
}

BoundaryClosure assemble_boundary_closure(const SpeciesSpec& spec, const ScalarField& c,
                                          const ScalarField& phi) {
  if (!phi.ghosts_ready()) {
    throw InvariantViolation("nernst_planck", "boundary closure needs the Robin ghost layer of Phi");
  }
  const Grid& g = c.grid();
  const auto faces = g.boundary_faces();
  BoundaryClosure out;
  out.outward_flux.assign(faces.size(), 0.0);
  switch (spec.bc) {
    case SpeciesBc::Blocking:
      break;
    case SpeciesBc::Dirichlet: {
      out.has_ghosts = true;
      out.ghost.resize(faces.size());
      const auto phi_ghost = phi.ghosts();
      for (std::size_t b = 0; b < faces.size(); ++b) {
        const std::size_t p = faces[b].cell;
        const double h = g.spacing(faces[b].axis);
        out.ghost[b] = 2.0 * spec.gamma - c[p];
        out.outward_flux[b] =
            electro_diffusive_face_flux(c[p], out.ghost[b], phi_ghost[b] - phi[p], spec.valence, spec.diffusivity, h);
      }
      break;
    }
    default:
      throw ConfigError("unknown boundary condition family for species '" + spec.name + "'");
  }
  return out;
}

FluxField assemble_fluxes(const SpeciesSpec& spec, const ScalarField& c, const ScalarField& phi,
                          const StaggeredVectorField& u) {
  const Grid& g = c.grid();
  FluxField out;
  for (int a = 0; a < g.dim(); ++a) {
    out.flux[a].assign(g.face_count(a), 0.0);
    const double h = g.spacing(a);
    const auto ua = u.component(a);
    auto& fa = out.flux[a];
    for_each_interior_face(g, a, [&](std::size_t p, std::size_t e, std::size_t f) {
      fa[f] = electro_diffusive_face_flux(c[p], c[e], phi[e] - phi[p], spec.valence, spec.diffusivity, h) +
              advective_face_flux(c[p], c[e], ua[f]);
    });
  }
  const auto closure = assemble_boundary_closure(spec, c, phi);
  const auto faces = g.boundary_faces();
  for (std::size_t b = 0; b < faces.size(); ++b) {
    out.flux[faces[b].axis][boundary_staggered_face(g, faces[b])] = faces[b].side * closure.outward_flux[b];
  }
  return out;
}

double positivity_dt_limit(const SpeciesSpec& spec, const ScalarField& phi, const StaggeredVectorField& u) {
  const Grid& g = phi.grid();
  std::vector<double> kappa(g.cell_count(), 0.0);
  for (int a = 0; a < g.dim(); ++a) {
    const double h = g.spacing(a);
    const double s = spec.diffusivity / (h * h);
    const auto ua = u.component(a);
    for_each_interior_face(g, a, [&](std::size_t p, std::size_t e, std::size_t f) {
      double bp = 0.0;
      double bm = 0.0;
      bernoulli_pair(spec.valence * (phi[e] - phi[p]), bp, bm);
      kappa[p] += s * bp;
      kappa[e] += s * bm;
      if (ua[f] > 0.0) kappa[p] += ua[f] / h;
      if (ua[f] < 0.0) kappa[e] -= ua[f] / h;
    });
  }
  if (spec.bc == SpeciesBc::Dirichlet) {
    const auto faces = g.boundary_faces();
    const auto phi_ghost = phi.ghosts();
    for (std::size_t b = 0; b < faces.size(); ++b) {
      const double h = g.spacing(faces[b].axis);
      double bp = 0.0;
      double bm = 0.0;
      bernoulli_pair(spec.valence * (phi_ghost[b] - phi[faces[b].cell]), bp, bm);
      kappa[faces[b].cell] += spec.diffusivity / (h * h) * (bp + bm);
    }
  }
  const double kmax = *std::max_element(kappa.begin(), kappa.end());
  return kmax > 0.0 ? 1.0 / kmax : std::numeric_limits<double>::infinity();
}

double stable_concentration_dt(std::span<const SpeciesSpec> species, const ScalarField& phi,
                               const StaggeredVectorField& u) {
  double dt = std::numeric_limits<double>::infinity();
  for (const auto& s : species) dt = std::min(dt, positivity_dt_limit(s, phi, u));
  return 0.9 * dt;
}

void advance_concentrations(SimState& state, std::span<const SpeciesSpec> species, double dt) {
  if (species.size() != state.concentrations.size()) {
    throw ConfigError("advance_concentrations: species/state length mismatch");
  }
  if (!(dt > 0.0)) throw ConfigError("time step must be positive", "run.dt");
  const Grid& g = state.grid();
  const auto faces = g.boundary_faces();
  std::vector<std::vector<double>> updated(species.size());

  for (std::size_t s = 0; s < species.size(); ++s) {
    const auto& spec = species[s];
    const ScalarField& c = state.concentrations[s];
    const ScalarField& phi = state.potential;
    std::vector<double> next(c.interior().begin(), c.interior().end());
    // Fluxes and the per-cell outflow coefficients share one Bernoulli pass.
    std::vector<double> kappa(next.size(), 0.0);
    for (int a = 0; a < g.dim(); ++a) {
      const double h = g.spacing(a);
      const double r = dt / h;
      const double k = spec.diffusivity / (h * h);
      const double q = spec.diffusivity / h;
      const auto ua = state.velocity.component(a);
      for_each_interior_face(g, a, [&](std::size_t p, std::size_t e, std::size_t f) {
        double bp = 0.0;
        double bm = 0.0;
        bernoulli_pair(spec.valence * (phi[e] - phi[p]), bp, bm);
        const double flux = q * (bp * c[p] - bm * c[e]) + advective_face_flux(c[p], c[e], ua[f]);
        next[p] -= r * flux;
        next[e] += r * flux;
        kappa[p] += k * bp;
        kappa[e] += k * bm;
        if (ua[f] > 0.0) kappa[p] += ua[f] / h;
        if (ua[f] < 0.0) kappa[e] -= ua[f] / h;
      });
    }
    if (spec.bc != SpeciesBc::Blocking) {
      const auto closure = assemble_boundary_closure(spec, c, phi);
      const auto phi_ghost = phi.ghosts();
      for (std::size_t b = 0; b < faces.size(); ++b) {
        const double h = g.spacing(faces[b].axis);
        next[faces[b].cell] -= dt / h * closure.outward_flux[b];
        double bp = 0.0;
        double bm = 0.0;
        bernoulli_pair(spec.valence * (phi_ghost[b] - phi[faces[b].cell]), bp, bm);
        kappa[faces[b].cell] += spec.diffusivity / (h * h) * (bp + bm);
      }
    }
    const double kmax = *std::max_element(kappa.begin(), kappa.end());
    const double limit = kmax > 0.0 ? 1.0 / kmax : std::numeric_limits<double>::infinity();
    if (dt > limit) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "time step " << dt << " exceeds the positivity limit " << limit << " of species '" << spec.name
          << "'; suggested dt " << 0.9 * limit;
      throw InvariantViolation("nernst_planck", msg.str());
    }
    for (std::size_t cell = 0; cell < next.size(); ++cell) {
      if (next[cell] < 0.0 || !std::isfinite(next[cell])) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "species '" << spec.name << "' concentration " << next[cell] << " at cell " << cell
            << " after step; suggested dt " << 0.5 * dt;
        throw NegativeConcentration(msg.str(), s, cell, next[cell], 0.5 * dt);
      }
    }
    updated[s] = std::move(next);
  }
  for (std::size_t s = 0; s < species.size(); ++s) {
    auto dst = state.concentrations[s].interior();
    std::copy(updated[s].begin(), updated[s].end(), dst.begin());
    state.concentrations[s].set_ghosts_ready(false);
  }
}

SlotboomView slotboom(const SimState& state, std::span<const SpeciesSpec> species) {
  if (species.size() != state.concentrations.size()) {
    throw ConfigError("slotboom: species/state length mismatch");
  }
  SlotboomView view;
  const auto& phi = state.potential;
  for (std::size_t s = 0; s < species.size(); ++s) {
    ScalarField out(state.grid());
    const auto& c = state.concentrations[s];
    for (std::size_t cell = 0; cell < state.grid().cell_count(); ++cell) {
      const double w = std::exp(species[s].valence * phi[cell]);
      if (!std::isfinite(w)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "exp(z Phi) overflows for species '" << species[s].name << "' at cell " << cell << " (Phi = "
            << phi[cell] << ")";
        throw InvariantViolation("nernst_planck", msg.str());
      }
      out[cell] = c[cell] * w;
    }
    view.values.push_back(std::move(out));
  }
  return view;
}

std::vector<ScalarField> from_slotboom(const SlotboomView& view, const ScalarField& phi,
                                       std::span<const SpeciesSpec> species) {
  std::vector<ScalarField> out;
  for (std::size_t s = 0; s < species.size(); ++s) {
    ScalarField c(phi.grid());
    for (std::size_t cell = 0; cell < phi.grid().cell_count(); ++cell) {
      c[cell] = view.values[s][cell] * std::exp(-species[s].valence * phi[cell]);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::pair<double, double> common_valence_and_diffusivity(std::span<const SpeciesSpec> species) {
  if (species.empty()) throw ConfigError("rho/sigma reduction needs at least one species");
  const double z = std::abs(species.front().valence);
  const double D = species.front().diffusivity;
  for (const auto& s : species) {
    if (s.diffusivity != D) {
      throw ConfigError("rho/sigma reduction requires equal diffusivities (species '" + s.name + "')");
    }
    if (std::abs(s.valence) != z) {
      throw ConfigError("rho/sigma reduction requires equal valence magnitudes (species '" + s.name + "')");
    }
    if (s.bc != SpeciesBc::Blocking) {
      throw ConfigError("rho/sigma reduction is implemented for blocking walls only (species '" + s.name + "')");
    }
  }
  return {z, D};
}

RhoSigmaFields to_rho_sigma(const SimState& state, std::span<const SpeciesSpec> species) {
  const auto [z, D] = common_valence_and_diffusivity(species);
  (void)D;
  RhoSigmaFields out{ScalarField(state.grid()), ScalarField(state.grid())};
  for (std::size_t s = 0; s < species.size(); ++s) {
    const auto c = state.concentrations[s].interior();
    for (std::size_t cell = 0; cell < c.size(); ++cell) {
      out.rho[cell] += species[s].valence * c[cell];
      out.sigma[cell] += z * c[cell];
    }
  }
  return out;
}

double rho_sigma_dt_limit(const ScalarField& phi, const StaggeredVectorField& u, double z, double D) {
  // The pair step is the species step on the cation and anion totals, so the
  // binding limit is the worse of the two valence signs.
  SpeciesSpec plus{"+", z, D, SpeciesBc::Blocking, 0.0, {}};
  SpeciesSpec minus{"-", -z, D, SpeciesBc::Blocking, 0.0, {}};
  return std::min(positivity_dt_limit(plus, phi, u), positivity_dt_limit(minus, phi, u));
}

void rho_sigma_step(RhoSigmaFields& fields, const ScalarField& phi, const StaggeredVectorField& u, double z,
                    double D, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive", "run.dt");
  const double limit = rho_sigma_dt_limit(phi, u, z, D);
  if (dt > limit) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "time step " << dt << " exceeds the (rho, sigma) positivity limit " << limit << "; suggested dt "
        << 0.9 * limit;
    throw InvariantViolation("nernst_planck", msg.str());
  }
  const Grid& g = phi.grid();
  auto& rho = fields.rho;
  auto& sigma = fields.sigma;
  std::vector<double> next_rho(rho.interior().begin(), rho.interior().end());
  std::vector<double> next_sigma(sigma.interior().begin(), sigma.interior().end());
  for (int a = 0; a < g.dim(); ++a) {
    const double h = g.spacing(a);
    const double r = dt / h;
    const double s = D / h;
    const auto ua = u.component(a);
    for_each_interior_face(g, a, [&](std::size_t p, std::size_t e, std::size_t f) {
      double bp = 0.0;
      double bm = 0.0;
      bernoulli_pair(z * (phi[e] - phi[p]), bp, bm);
      const double half_sum = 0.5 * (bp + bm);
      const double half_diff = 0.5 * (bp - bm);
      const double f_rho = s * (half_sum * (rho[p] - rho[e]) + half_diff * (sigma[p] + sigma[e])) +
                           advective_face_flux(rho[p], rho[e], ua[f]);
      const double f_sigma = s * (half_sum * (sigma[p] - sigma[e]) + half_diff * (rho[p] + rho[e])) +
                             advective_face_flux(sigma[p], sigma[e], ua[f]);
      next_rho[p] -= r * f_rho;
      next_rho[e] += r * f_rho;
      next_sigma[p] -= r * f_sigma;
      next_sigma[e] += r * f_sigma;
    });
  }
  double scale = 0.0;
  for (double v : next_sigma) scale = std::max(scale, std::abs(v));
  for (std::size_t cell = 0; cell < next_rho.size(); ++cell) {
    const double slack = -1e-12 * scale;
    if (next_sigma[cell] + next_rho[cell] < slack || next_sigma[cell] - next_rho[cell] < slack) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "(rho, sigma) step left sigma < |rho| at cell " << cell << "; suggested dt " << 0.5 * dt;
      throw NegativeConcentration(msg.str(), 0, cell, next_sigma[cell] - std::abs(next_rho[cell]), 0.5 * dt);
    }
  }
  std::copy(next_rho.begin(), next_rho.end(), rho.interior().begin());
  std::copy(next_sigma.begin(), next_sigma.end(), sigma.interior().begin());
}

}  // namespace npsim
