#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "npsim/config.hpp"
#include "npsim/diagnostics.hpp"
#include "npsim/poisson.hpp"

namespace npsim {

/// Oracles that share no stencil code with the modules they check.

inline constexpr std::size_t kDenseOracleMaxUnknowns = 4096;

struct DenseSolveInfo {
  double symmetry_error = 0.0;  ///< max |A_ij - A_ji|
  double min_pivot = 0.0;       ///< smallest Cholesky pivot L_ii^2
  bool positive_definite = false;
};

/// Assembles the Robin-Poisson system cell by cell as a dense matrix and
/// solves it by Cholesky. Throws ConfigError above kDenseOracleMaxUnknowns cells
/// and InvariantViolation if a pivot is not positive.
ScalarField dense_poisson_oracle(const RobinPoissonProblem& problem, DenseSolveInfo* info = nullptr);

struct ConvergenceReport {
  std::string case_name;
  /// "h" for spatial refinement, "dt" for temporal.
  std::string parameter;
  std::vector<int> cells;       ///< cells per axis at each level
  std::vector<double> levels;   ///< h or dt at each level, halved each time
  std::vector<double> errors;   ///< max-norm error at each level
  std::vector<double> orders;   ///< log2(e_k / e_{k+1})
  double fitted_order = 0.0;    ///< least-squares slope of log e against log level
  double target_order = 0.0;
  bool passed = false;
};

std::vector<std::string> mms_case_names();

/// poisson_robin: one report. diffusion_blocking: space then time regime.
/// advection_diffusion_frozen_u: one report. Unknown names throw ConfigError.
std::vector<ConvergenceReport> mms_convergence(const std::string& case_name);

std::string format_report(const ConvergenceReport& report);

struct RhoSigmaReport {
  double max_deviation = 0.0;
  std::uint64_t steps = 0;
  double t = 0.0;
};

/// Runs the configuration with the (rho, sigma) shadow enabled for `steps`
/// steps and returns the worst sup-norm deviation between the pair and the
/// charge/total built from the species.
RhoSigmaReport rho_sigma_equivalence(SimConfig config, std::uint64_t steps);

enum class TraceFamily { Constant, Zero, BoundaryPeaked, RandomFourier };

const char* to_string(TraceFamily f) noexcept;

struct TraceSample {
  std::string label;
  int cells = 0;
  double boundary_norm = 0.0;  ///< ||f||_{L^p(boundary)}
  /// ||f||_{Lp(bdry)} / (||grad f||^{1/p} ||f||_{L^{2(p-1)}}^{(p-1)/p} + ||f||_{Lp})
  double ratio = 0.0;
  /// ||f||_{Lp(bdry)} / ||f||_{H^1}
  double h1_ratio = 0.0;
};

struct TraceCheckReport {
  TraceFamily family = TraceFamily::BoundaryPeaked;
  double p = 2.0;
  std::vector<int> cells;
  std::vector<TraceSample> samples;
  std::vector<double> max_ratio;     ///< per level
  std::vector<double> max_h1_ratio;  ///< per level
  /// |last - previous| / previous over the two finest levels.
  double variation = 0.0;
  bool passed = false;
};

/// Raw trace ratios (unit constants) for each sample of the family on the
/// unit square at every level. Boundary values are taken at the face
/// midpoints, interior norms by midpoint quadrature. p must lie in [2, 4].
TraceCheckReport trace_inequality_check(std::span<const int> levels, TraceFamily family, double p,
                                        std::uint64_t seed = 7);

struct BudgetLevel {
  double dt = 0.0;
  std::uint64_t steps = 0;
  double max_abs_residual = 0.0;
};

struct BudgetStudyReport {
  std::vector<BudgetLevel> levels;
  std::vector<double> ratios;  ///< residual(dt/2) / residual(dt)
  bool passed = false;
};

/// Runs `config` to `t_end` with fixed dt = dt0, dt0/2, ... (`count` levels)
/// on its own grid. Passes when every halving cuts the max |budget residual|
/// by at least 35%.
BudgetStudyReport budget_refinement_study(SimConfig config, double dt0, double t_end, int count = 3);

/// Lyapunov functional by a separate route: the wall value of Phi comes
/// from the Robin relation and xi rather than from the ghost layer.
double lyapunov_oracle(const SimState& state, std::span<const SpeciesSpec> species, const PhysicalParams& params,
                       std::span<const double> xi);

/// Divergence-free MAC field from a random nodal stream function that
/// vanishes on the walls (2D grids only).
StaggeredVectorField random_solenoidal(const Grid& grid, std::uint64_t seed, double amplitude = 1.0);

struct CheckResult {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  /// "<=" or ">=": how value is compared against limit.
  std::string relation = "<=";
  bool passed = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  double seconds = 0.0;
  bool passed() const noexcept;
};

/// poisson, np, fluid, energy, trace, rho-sigma.
std::vector<std::string> suite_names();
SuiteReport run_suite(const std::string& name);
std::string format_suite(const SuiteReport& report);
/// One-line JSON summary record.
std::string suite_record(const SuiteReport& report);

}  // namespace npsim
