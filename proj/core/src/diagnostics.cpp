#include "npsim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "npsim/errors.hpp"
#include "npsim/fluid.hpp"
#include "npsim/nernst_planck.hpp"
#include "npsim/poisson.hpp"

namespace npsim {
namespace {

double c_log_c(double c) noexcept { return c > 0.0 ? c * std::log(c) : 0.0; }

}  // namespace

double logarithmic_mean(double a, double b) noexcept {
  if (!(a > 0.0) || !(b > 0.0)) return 0.0;
  const double x = a / b - 1.0;
  if (std::abs(x) < 1e-4) {
    // b x / log(1 + x) expanded about x = 0.
    return b * (1.0 + x / 2.0 - x * x / 12.0 + x * x * x / 24.0);
  }
  return (a - b) / (std::log(a) - std::log(b));
}

double dissipation_face_concentration(double c_p, double c_e, double delta) noexcept {
  const double b = bernoulli(std::abs(delta));
  const double b_plus = delta >= 0.0 ? b : b - delta;
  const double b_minus = delta >= 0.0 ? b + delta : b;
  return logarithmic_mean(b_plus * c_p, b_minus * c_e);
}

LyapunovParts lyapunov_parts(const SimState& state, std::span<const SpeciesSpec> species,
                             const PhysicalParams& params) {
  if (!state.potential.ghosts_ready()) {
    throw InvariantViolation("diagnostics", "lyapunov: Phi ghost layer not populated");
  }
  return lyapunov_parts(state, species, params, velocity_gradient_norms(state.velocity).l2_sq,
                        gradient_squared_norm(state.potential));
}

LyapunovParts lyapunov_parts(const SimState& state, std::span<const SpeciesSpec> species,
                             const PhysicalParams& params, double u_sq, double grad_phi_sq) {
  if (!state.potential.ghosts_ready()) {
    throw InvariantViolation("diagnostics", "lyapunov: Phi ghost layer not populated");
  }
  const Grid& g = state.grid();
  LyapunovParts parts;
  parts.kinetic = u_sq / (2.0 * params.K);
  for (std::size_t s = 0; s < species.size(); ++s) {
    double sum = 0.0;
    for (double c : state.concentrations[s].interior()) sum += c_log_c(c);
    parts.entropy += sum * g.cell_volume();
  }
  parts.field = 0.5 * params.epsilon * grad_phi_sq;
  double wall = 0.0;
  const auto faces = g.boundary_faces();
  for (std::size_t b = 0; b < faces.size(); ++b) {
    const double f = state.potential.face_value(b);
    wall += f * f * faces[b].area;
  }
  parts.boundary = 0.5 * params.epsilon * params.tau * wall;
  return parts;
}

double lyapunov(const SimState& state, std::span<const SpeciesSpec> species, const PhysicalParams& params) {
  return lyapunov_parts(state, species, params).total();
}

double dissipation(const SimState& state, std::span<const SpeciesSpec> species) {
  const Grid& g = state.grid();
  const auto& n = g.cells();
  const auto& phi = state.potential;
  const double vol = g.cell_volume();
  std::vector<double> log_c(g.cell_count());
  double total = 0.0;
  for (std::size_t s = 0; s < species.size(); ++s) {
    const auto& c = state.concentrations[s];
    const double z = species[s].valence;
    for (std::size_t i = 0; i < log_c.size(); ++i) log_c[i] = c[i] > 0.0 ? std::log(c[i]) : 0.0;
    double sum = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const double h = g.spacing(a);
      const std::size_t st = g.stride(a);
      for (int k = 0; k < n[2]; ++k) {
        for (int j = 0; j < n[1]; ++j) {
          for (int i = 0; i < n[0]; ++i) {
            const std::array<int, 3> pos{i, j, k};
            if (pos[a] == n[a] - 1) continue;
            const std::size_t p = g.index(i, j, k);
            const std::size_t e = p + st;
            if (!(c[p] > 0.0) || !(c[e] > 0.0)) continue;
            const double delta = z * (phi[e] - phi[p]);
            const double dmu = log_c[e] - log_c[p] + delta;
            double cf = 0.0;
            if (std::abs(dmu) < 1e-4) {
              cf = dissipation_face_concentration(c[p], c[e], delta);
            } else {
              // log(B(d) cP) - log(B(-d) cE) = -dmu, so the log mean needs no
              // further logarithms.
              const double b = bernoulli(std::abs(delta));
              const double bp = delta >= 0.0 ? b : b - delta;
              const double bm = delta >= 0.0 ? b + delta : b;
              cf = (bm * c[e] - bp * c[p]) / dmu;
            }
            sum += cf * (dmu / h) * (dmu / h);
          }
        }
      }
    }
    total += species[s].diffusivity * sum * vol;
  }
  return total;
}

MuVariance mu_variance(const SimState& state, std::span<const SpeciesSpec> species) {
  MuVariance out;
  const auto& phi = state.potential;
  std::vector<double> mu;
  for (std::size_t s = 0; s < species.size(); ++s) {
    const auto c = state.concentrations[s].interior();
    mu.clear();
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] > 0.0) mu.push_back(std::log(c[i]) + species[s].valence * phi[i]);
    }
    if (mu.size() < c.size()) out.flagged = true;
    if (mu.empty()) {
      out.variance.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    double mean = 0.0;
    for (double m : mu) mean += m;
    mean /= static_cast<double>(mu.size());
    double var = 0.0;
    for (double m : mu) var += (m - mean) * (m - mean);
    out.variance.push_back(var / static_cast<double>(mu.size()));
  }
  return out;
}

double cancellation_quantity(const SimState& state, std::span<const SpeciesSpec> species) {
  const Grid& g = state.grid();
  double sum = 0.0;
  for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
    double rho = 0.0;
    double weighted = 0.0;
    for (std::size_t s = 0; s < species.size(); ++s) {
      const double z = species[s].valence;
      const double c = state.concentrations[s][cell];
      rho += z * c;
      weighted += z * std::abs(z) * c * c;
    }
    sum += rho * weighted;
  }
  return sum * g.cell_volume();
}

double cancellation_quantity_squared_form(const SimState& state, std::span<const SpeciesSpec> species) {
  if (species.size() != 2) throw ConfigError("squared-form cancellation quantity needs exactly two species");
  const Grid& g = state.grid();
  double sum = 0.0;
  for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
    const double c1 = state.concentrations[0][cell];
    const double c2 = state.concentrations[1][cell];
    const double rho = species[0].valence * c1 + species[1].valence * c2;
    sum += rho * rho * (std::abs(species[0].valence) * c1 + std::abs(species[1].valence) * c2);
  }
  return sum * g.cell_volume();
}

bool MixedBcMonitor::applies(std::span<const SpeciesSpec> species) noexcept {
  return species.size() == 2 && species[0].bc == SpeciesBc::Dirichlet && species[1].bc == SpeciesBc::Blocking &&
         species[0].valence > 0.0 && species[1].valence < 0.0;
}

MixedBcMonitor::MixedBcMonitor(std::span<const SpeciesSpec> species) {
  if (!applies(species)) {
    throw ConfigError(
        "mixed monitors need species 1 selective (gamma_1), species 2 blocking, and z1 > 0 > z2");
  }
  gamma1_ = species[0].gamma;
}

MixedMonitors MixedBcMonitor::sample(const SimState& state, std::span<const SpeciesSpec> species) const {
  (void)species;
  const Grid& g = state.grid();
  MixedMonitors m;
  double q2 = 0.0;
  double l1 = 0.0;
  for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
    const double q = state.concentrations[0][cell] - gamma1_;
    q2 += q * q;
    l1 += std::abs(state.concentrations[1][cell]);
  }
  m.q1_l2 = std::sqrt(q2 * g.cell_volume());
  m.c2_l1 = l1 * g.cell_volume();
  m.rho_sq_integral = rho_sq_integral_;
  return m;
}

void MixedBcMonitor::accumulate(const SimState& state, std::span<const SpeciesSpec> species, double dt) {
  const auto rho = charge_density(state, species);
  double sum = 0.0;
  for (double r : rho.interior()) sum += r * r;
  rho_sq_integral_ += dt * sum * state.grid().cell_volume();
}

DiagnosticsRecord compute_record(const SimState& state, std::span<const SpeciesSpec> species,
                                 const PhysicalParams& params, double U_T) {
  const Grid& g = state.grid();
  DiagnosticsRecord rec;
  rec.t = state.t;
  rec.step = state.step;
  for (std::size_t s = 0; s < species.size(); ++s) {
    const auto c = state.concentrations[s].interior();
    double sum = 0.0;
    double sq = 0.0;
    double mx = 0.0;
    for (double v : c) {
      sum += v;
      sq += v * v;
      mx = std::max(mx, std::abs(v));
    }
    rec.mass.push_back(sum * g.cell_volume());
    rec.l2.push_back(std::sqrt(sq * g.cell_volume()));
    rec.linf.push_back(mx);
  }
  const auto norms = velocity_gradient_norms(state.velocity);
  const double grad_phi_sq = gradient_squared_norm(state.potential);
  LyapunovParts parts = lyapunov_parts(state, species, params, norms.l2_sq, grad_phi_sq);
  rec.V = parts.total();
  rec.dissipation = dissipation(state, species);
  rec.grad_u_sq = norms.grad_sq;
  rec.u_sq = norms.l2_sq;
  rec.U_T = U_T;
  const auto mv = mu_variance(state, species);
  rec.mu_var = mv.variance;
  rec.mu_var_flag = mv.flagged;
  rec.Q = cancellation_quantity(state, species);
  double phi_sq = 0.0;
  for (double v : state.potential.interior()) phi_sq += v * v;
  rec.phi_h1 = std::sqrt(phi_sq * g.cell_volume() + grad_phi_sq);
  return rec;
}

double energy_budget_residual(double v_before, double v_after, double dissipation_before, double grad_u_sq_before,
                              double dt, const PhysicalParams& params) {
  return (v_after - v_before) / dt + dissipation_before + (params.nu / params.K) * grad_u_sq_before;
}

std::optional<double> energy_budget_residual(const DiagnosticsRecord& before, const DiagnosticsRecord& after,
                                             double dt, const PhysicalParams& params) {
  if (after.step != before.step + 1) return std::nullopt;
  return energy_budget_residual(before.V, after.V, before.dissipation, before.grad_u_sq, dt, params);
}

double lyapunov_tolerance(double dt, double h, double interval, double V, double dissipation) {
  const double scale = 1.0 + std::max(std::abs(V), dissipation);
  return kBudgetConstant * (dt + h * h) * interval * scale;
}

MonotonicityReport check_lyapunov_monotone(std::span<const DiagnosticsRecord> records, double dt, double h) {
  MonotonicityReport rep;
  rep.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& a = records[i - 1];
    const auto& b = records[i];
    const double tol = lyapunov_tolerance(dt, h, b.t - a.t, a.V, a.dissipation);
    const double excess = b.V - a.V - tol;
    ++rep.pairs;
    if (excess > rep.worst_excess) {
      rep.worst_excess = excess;
      rep.worst_index = i;
    }
    if (excess > 0.0) rep.ok = false;
  }
  if (rep.pairs == 0) rep.worst_excess = 0.0;
  return rep;
}

BoundednessReport check_bounded(std::span<const double> times, std::span<const double> values, double slack) {
  BoundednessReport rep;
  rep.slack = slack;
  if (times.empty()) return rep;
  const double mid = 0.5 * (times.front() + times.back());
  rep.first_half_max = -std::numeric_limits<double>::infinity();
  rep.second_half_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] <= mid) {
      rep.first_half_max = std::max(rep.first_half_max, values[i]);
    } else {
      rep.second_half_max = std::max(rep.second_half_max, values[i]);
    }
  }
  rep.ok = !(rep.second_half_max > rep.first_half_max + slack);
  return rep;
}

}  // namespace npsim
