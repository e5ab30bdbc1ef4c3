#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "npsim/fields.hpp"
#include "npsim/model.hpp"

namespace npsim {

/// Slack constant in the discrete Lyapunov and budget checks:
/// tol = kBudgetConstant * (dt + h^2) * interval * (1 + max(|V|, D)).
inline constexpr double kBudgetConstant = 1.0;

struct MixedMonitors {
  double q1_l2 = 0.0;            ///< ||c1 - gamma1||_{L2}
  double c2_l1 = 0.0;            ///< ||c2||_{L1}
  double rho_sq_integral = 0.0;  ///< running int_0^t ||rho||_{L2}^2
};

struct DiagnosticsRecord {
  double t = 0.0;
  std::uint64_t step = 0;
  std::vector<double> mass;
  std::vector<double> l2;
  std::vector<double> linf;
  double V = 0.0;
  double dissipation = 0.0;
  double grad_u_sq = 0.0;
  double u_sq = 0.0;
  double U_T = 0.0;
  /// (V^{n+1} - V^n)/dt + D^n + (nu/K)||grad u^n||^2 for the step that ends
  /// at this record; absent for the first record of a stream.
  std::optional<double> budget_residual;
  std::vector<double> mu_var;
  /// Some species had empty positive support; its mu variance is NaN.
  bool mu_var_flag = false;
  double Q = 0.0;
  double phi_h1 = 0.0;
  std::optional<MixedMonitors> mixed;
};

struct LyapunovParts {
  double kinetic = 0.0;   ///< (1/2K) ||u||^2
  double entropy = 0.0;   ///< sum_i int c_i log c_i
  double field = 0.0;     ///< (eps/2) ||grad Phi||^2
  double boundary = 0.0;  ///< (eps tau/2) ||Phi||^2 on the walls
  double total() const noexcept { return kinetic + entropy + field + boundary; }
};

/// Discrete Lyapunov functional. c log c is taken as 0 at c = 0; wall values
/// of Phi are the Robin face midpoints. Phi's ghost layer must be populated.
LyapunovParts lyapunov_parts(const SimState& state, std::span<const SpeciesSpec> species,
                             const PhysicalParams& params);
/// Same, with ||u||^2 and ||grad Phi||^2 supplied by the caller.
LyapunovParts lyapunov_parts(const SimState& state, std::span<const SpeciesSpec> species,
                             const PhysicalParams& params, double u_sq, double grad_phi_sq);
double lyapunov(const SimState& state, std::span<const SpeciesSpec> species, const PhysicalParams& params);

/// Face concentration used in the dissipation: L(B(d) cP, B(-d) cE), with L
/// the logarithmic mean and d = z (Phi_E - Phi_P). For z = 0 this is the
/// plain logarithmic mean. With it D_i c_face (mu_P - mu_E)/h is exactly the
/// SG flux, so the discrete entropy production matches the scheme.
double dissipation_face_concentration(double c_p, double c_e, double delta) noexcept;
double logarithmic_mean(double a, double b) noexcept;

/// sum_i D_i sum_{interior faces} c_face ((mu_E - mu_P)/h)^2 * cell volume.
double dissipation(const SimState& state, std::span<const SpeciesSpec> species);

struct MuVariance {
  std::vector<double> variance;
  bool flagged = false;  ///< some species had cells with c <= 0 (excluded)
};

/// Spatial variance of mu_i = log c_i + z_i Phi over cells with c_i > 0.
MuVariance mu_variance(const SimState& state, std::span<const SpeciesSpec> species);

/// int rho * sum_i z_i |z_i| c_i^2. For two species with z1 > 0 > z2 this
/// equals int rho^2 (|z1| c1 + |z2| c2) >= 0.
double cancellation_quantity(const SimState& state, std::span<const SpeciesSpec> species);
/// int rho^2 (|z1| c1 + |z2| c2); two species only.
double cancellation_quantity_squared_form(const SimState& state, std::span<const SpeciesSpec> species);

/// Tracks the mixed selective/blocking configuration: species 0 selective
/// with gamma_1, species 1 blocking, z1 > 0 > z2.
class MixedBcMonitor {
 public:
  /// Throws ConfigError for any other configuration.
  explicit MixedBcMonitor(std::span<const SpeciesSpec> species);
  static bool applies(std::span<const SpeciesSpec> species) noexcept;

  /// Current norms; the rho integral includes everything accumulated so far.
  MixedMonitors sample(const SimState& state, std::span<const SpeciesSpec> species) const;
  /// Rectangle rule: integral += dt * ||rho(state)||^2.
  void accumulate(const SimState& state, std::span<const SpeciesSpec> species, double dt);
  double rho_sq_integral() const noexcept { return rho_sq_integral_; }
  void restore(double value) noexcept { rho_sq_integral_ = value; }

 private:
  double gamma1_;
  double rho_sq_integral_ = 0.0;
};

/// Everything except the budget residual and the mixed monitors, which need
/// history; the orchestrator fills those in.
DiagnosticsRecord compute_record(const SimState& state, std::span<const SpeciesSpec> species,
                                 const PhysicalParams& params, double U_T);

/// Budget residual between two records one step apart; nullopt if they are
/// not consecutive steps.
std::optional<double> energy_budget_residual(const DiagnosticsRecord& before, const DiagnosticsRecord& after,
                                             double dt, const PhysicalParams& params);
double energy_budget_residual(double v_before, double v_after, double dissipation_before,
                              double grad_u_sq_before, double dt, const PhysicalParams& params);

/// tol_V for a pair of samples `interval` apart.
double lyapunov_tolerance(double dt, double h, double interval, double V, double dissipation);

struct MonotonicityReport {
  bool ok = true;
  double worst_excess = 0.0;  ///< max of V^{n+1} - V^n - tol over pairs
  std::size_t worst_index = 0;  ///< later record of the worst pair
  std::size_t pairs = 0;
};

/// V non-increasing across consecutive samples up to lyapunov_tolerance.
MonotonicityReport check_lyapunov_monotone(std::span<const DiagnosticsRecord> records, double dt, double h);

struct BoundednessReport {
  bool ok = true;
  double first_half_max = 0.0;
  double second_half_max = 0.0;
  double slack = 0.0;
};

/// max over the second half of the run <= max over the first half + slack.
BoundednessReport check_bounded(std::span<const double> times, std::span<const double> values, double slack);

}  // namespace npsim
