#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "npsim/config.hpp"
#include "npsim/diagnostics.hpp"
#include "npsim/fluid.hpp"
#include "npsim/model.hpp"
#include "npsim/nernst_planck.hpp"
#include "npsim/poisson.hpp"

namespace npsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitInvariant = 4;

/// Maps the library's exception types to process exit codes.
int exit_code_for(const std::exception& e) noexcept;

struct RunSummary {
  std::uint64_t steps = 0;
  double t = 0.0;
  double dt = 0.0;
  double max_abs_budget_residual = 0.0;
  /// |mass(t) - mass(0)| / mass(0) per species, worst over the run.
  std::vector<double> max_relative_mass_drift;
  double min_concentration = 0.0;
  double U_T = 0.0;
  double max_divergence = 0.0;
  /// Worst (rho, sigma) shadow deviation; NaN when no shadow run.
  double rho_sigma_deviation = 0.0;
  int exit_code = kExitOk;
  std::string error_module;
  std::string error_message;
};

struct RunOptions {
  /// Stop time; defaults to run.t_end.
  std::optional<double> until;
  /// Stop after this absolute step index.
  std::optional<std::uint64_t> stop_at_step;
  /// Write the diagnostics stream, dumps, checkpoints and summary.
  bool write_outputs = true;
  /// Overrides output.directory.
  std::optional<std::string> out_dir;
  /// Called for every sampled record (including the one at the start).
  std::function<void(const DiagnosticsRecord&)> on_sample;
  /// Called after every completed step.
  std::function<void(const DiagnosticsRecord&)> on_step;
};

/// Gummel-lagged time loop: each step takes Phi^n from c^n, advances the
/// species against (Phi^n, u^n), advances the fluid with the force from
/// (rho^n, Phi^n), then re-solves Phi for the new concentrations.
class Simulation {
 public:
  explicit Simulation(SimConfig config);

  /// Rebuilds a run from a checkpoint written by save_checkpoint.
  static Simulation from_checkpoint(const std::string& path);
  static Simulation from_checkpoint_bytes(std::span<const unsigned char> bytes);

  /// One step; returns the record of the new state (budget residual filled).
  const DiagnosticsRecord& step(std::optional<double> stop_time = std::nullopt);

  /// Steps until the stop time. Library errors are caught, recorded in the
  /// summary (and on disk when writing outputs, with an abort checkpoint),
  /// and mapped to exit codes.
  RunSummary run(const RunOptions& options = {});

  std::vector<unsigned char> checkpoint_bytes() const;
  void save_checkpoint(const std::string& path) const;

  const SimConfig& config() const noexcept { return config_; }
  const SimState& state() const noexcept { return state_; }
  SimState& mutable_state() noexcept { return state_; }
  const std::vector<SpeciesSpec>& species() const noexcept { return config_.species; }
  const BoundaryData& xi() const noexcept { return xi_; }
  const DiagnosticsRecord& current() const noexcept { return current_; }
  const std::optional<RhoSigmaFields>& shadow() const noexcept { return shadow_; }
  /// Step size the next step would use, before truncation at the stop time.
  double next_dt();
  double resolved_dt() const noexcept { return dt_; }
  RunSummary summary() const;

  /// Re-solve Phi for the current concentrations and refresh the record.
  void refresh();

  /// Writes the stream header / one record line.
  static void write_header(std::ostream& out, const SimConfig& config, double dt);
  static void write_record(std::ostream& out, const DiagnosticsRecord& rec, const SimConfig& config,
                           double dt, std::optional<double> rho_sigma_dev);

 private:
  struct Restore {};
  Simulation(SimConfig config, Restore);

  void solve_potential();
  void build_record();
  void dump_fields(const std::string& dir) const;
  void write_summary(const std::string& dir, const RunSummary& s) const;

  SimConfig config_;
  Grid grid_;
  BoundaryData xi_;
  SimState state_;
  RobinPoissonSolver poisson_;
  FluidSolver fluid_;
  double dt_ = 0.0;
  double last_dt_ = 0.0;
  RegularityMonitor regularity_;
  std::optional<MixedBcMonitor> mixed_;
  std::optional<RhoSigmaFields> shadow_;
  double shadow_z_ = 0.0;
  double shadow_D_ = 0.0;
  double shadow_dev_ = 0.0;
  double shadow_dev_max_ = 0.0;
  DiagnosticsRecord current_;
  std::vector<double> initial_mass_;
  std::vector<double> max_drift_;
  double max_abs_residual_ = 0.0;
  double min_concentration_ = 0.0;
  double max_divergence_ = 0.0;
};

/// One-shot helpers used by the CLI.
RunSummary run_config(const SimConfig& config, const RunOptions& options = {});
RunSummary resume_checkpoint(const std::string& path, const RunOptions& options = {});

}  // namespace npsim
