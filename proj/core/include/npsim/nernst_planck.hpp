#pragma once

#include <array>
#include <span>
#include <vector>

#include "npsim/fields.hpp"
#include "npsim/model.hpp"

namespace npsim {

/// B(x) = x / (e^x - 1), with B(0) = 1 and a series branch for |x| < 1e-4.
double bernoulli(double x) noexcept;

/// Scharfetter-Gummel electro-diffusive flux from cell P to its neighbour E
/// at distance h: (D/h) [B(d) cP - B(-d) cE] with d = z (Phi_E - Phi_P).
/// Positive values move mass from P toward E.
double electro_diffusive_face_flux(double c_p, double c_e, double dphi, double z, double D,
                                   double h) noexcept;

/// First-order upwind advective flux with the face velocity oriented P -> E.
double advective_face_flux(double c_p, double c_e, double u_face) noexcept;

/// Total normal flux on every staggered face, oriented along +axis. Boundary
/// entries hold the wall flux (zero for blocking walls).
struct FluxField {
  std::array<std::vector<double>, 3> flux;
};

/// Wall closure for one species: ghost concentrations (Dirichlet walls only)
/// and the outward normal flux through every boundary face.
struct BoundaryClosure {
  std::vector<double> ghost;
  std::vector<double> outward_flux;
  bool has_ghosts = false;
};

/// Blocking walls get an exactly zero flux. Selective walls get the ghost
/// 2*gamma - c_interior and the SG flux across the wall using the potential
/// drop to the Robin ghost of Phi. Phi's ghost layer must be populated.
BoundaryClosure assemble_boundary_closure(const SpeciesSpec& spec, const ScalarField& c,
                                          const ScalarField& phi);

FluxField assemble_fluxes(const SpeciesSpec& spec, const ScalarField& c, const ScalarField& phi,
                          const StaggeredVectorField& u);

/// Largest dt for which the explicit update keeps this species nonnegative:
/// 1 / max over cells of the summed outflow coefficients of c_P. Selective
/// walls count with B(d) + B(-d) because of the extrapolated ghost.
double positivity_dt_limit(const SpeciesSpec& spec, const ScalarField& phi, const StaggeredVectorField& u);

/// 0.9 x the minimum positivity limit over species.
double stable_concentration_dt(std::span<const SpeciesSpec> species, const ScalarField& phi,
                               const StaggeredVectorField& u);

/// One forward-Euler step of every species against the current Phi and u.
/// Throws InvariantViolation if dt exceeds a species' positivity limit and
/// NegativeConcentration if a cell still goes negative; the state is left
/// untouched on failure.
void advance_concentrations(SimState& state, std::span<const SpeciesSpec> species, double dt);

/// Slotboom variables c~_i = c_i exp(z_i Phi), a derived diagnostic view.
struct SlotboomView {
  std::vector<ScalarField> values;
};

SlotboomView slotboom(const SimState& state, std::span<const SpeciesSpec> species);
std::vector<ScalarField> from_slotboom(const SlotboomView& view, const ScalarField& phi,
                                       std::span<const SpeciesSpec> species);

/// Charge / weighted total (rho, sigma) pair for species sharing one
/// diffusivity D and one valence magnitude z.
struct RhoSigmaFields {
  ScalarField rho;
  ScalarField sigma;
};

/// Checks the common-D, common-|z| hypothesis; returns (z, D).
std::pair<double, double> common_valence_and_diffusivity(std::span<const SpeciesSpec> species);

RhoSigmaFields to_rho_sigma(const SimState& state, std::span<const SpeciesSpec> species);

/// One step of the coupled pair with blocking walls:
///   d_t rho + u.grad rho = D div(grad rho + z sigma grad Phi)
///   d_t sigma + u.grad sigma = D div(grad sigma + z rho grad Phi)
/// The face fluxes are the species SG fluxes rewritten in (rho, sigma), so the
/// step agrees with the full species step up to rounding.
void rho_sigma_step(RhoSigmaFields& fields, const ScalarField& phi, const StaggeredVectorField& u, double z,
                    double D, double dt);

double rho_sigma_dt_limit(const ScalarField& phi, const StaggeredVectorField& u, double z, double D);

}  // namespace npsim
