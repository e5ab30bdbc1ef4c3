#include "npsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "npsim/errors.hpp"
#include "npsim/io.hpp"

namespace npsim {
namespace {

constexpr char kMagic[8] = {'N', 'P', 'S', 'I', 'M', 'C', 'K', 'P'};
constexpr std::uint32_t kCheckpointVersion = 1;

double stop_slack(double stop) { return 1e-12 * std::max(1.0, std::abs(stop)); }

std::string step_dir(std::uint64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%08llu", static_cast<unsigned long long>(step));
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  write_file_atomic(path, std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(text.data()),
                                                         text.size()));
}

}  // namespace

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const SolverError*>(&e)) return kExitSolver;
  if (dynamic_cast<const InvariantViolation*>(&e)) return kExitInvariant;
  return kExitSolver;
}

Simulation::Simulation(SimConfig config, Restore)
    : config_(std::move(config)),
      grid_((validate(config_), config_.grid.make())),
      xi_(sample_xi(grid_, config_.xi)),
      state_(grid_, config_.species.size()),
      poisson_(grid_, config_.params.epsilon, config_.params.tau, Preconditioner::Separable),
      fluid_(grid_, config_.params) {
  if (MixedBcMonitor::applies(config_.species)) mixed_.emplace(config_.species);
  if (config_.run.rho_sigma_shadow) {
    const auto [z, D] = common_valence_and_diffusivity(config_.species);
    shadow_z_ = z;
    shadow_D_ = D;
  }
}

Simulation::Simulation(SimConfig config) : Simulation(std::move(config), Restore{}) {
  const auto& species = config_.species;
  for (std::size_t s = 0; s < species.size(); ++s) {
    state_.concentrations[s] = make_profile(grid_, species[s].initial, config_.run.seed + s);
    for (std::size_t c = 0; c < grid_.cell_count(); ++c) {
      const double v = state_.concentrations[s][c];
      if (!(v >= 0.0) || !std::isfinite(v)) {
        const std::string key = "species[" + std::to_string(s) + "].initial";
        throw ConfigError(key + " produces a negative or non-finite concentration", key);
      }
    }
  }
  if (config_.run.rho_sigma_shadow) shadow_ = to_rho_sigma(state_, species);
  solve_potential();
  build_record();
  initial_mass_ = current_.mass;
  max_drift_.assign(species.size(), 0.0);
  min_concentration_ = state_.min_concentration();
  max_divergence_ = state_.velocity.max_abs_divergence();
  shadow_dev_max_ = shadow_dev_;
  next_dt();
}

void Simulation::solve_potential() {
  const auto rho = charge_density(state_, config_.species);
  poisson_.solve(rho.interior(), xi_.xi, state_.potential);
}

void Simulation::build_record() {
  current_ = compute_record(state_, config_.species, config_.params, regularity_.value());
  if (mixed_) current_.mixed = mixed_->sample(state_, config_.species);
  if (shadow_) {
    const auto full = to_rho_sigma(state_, config_.species);
    double dr = 0.0;
    double ds = 0.0;
    for (std::size_t c = 0; c < grid_.cell_count(); ++c) {
      dr = std::max(dr, std::abs(full.rho[c] - shadow_->rho[c]));
      ds = std::max(ds, std::abs(full.sigma[c] - shadow_->sigma[c]));
    }
    shadow_dev_ = dr + ds;
  }
}

void Simulation::refresh() {
  solve_potential();
  build_record();
}

double Simulation::next_dt() {
  const auto& species = config_.species;
  double limit = std::numeric_limits<double>::infinity();
  for (const auto& s : species) {
    limit = std::min(limit, positivity_dt_limit(s, state_.potential, state_.velocity));
  }
  if (shadow_) {
    limit = std::min(limit, rho_sigma_dt_limit(state_.potential, state_.velocity, shadow_z_, shadow_D_));
  }
  if (config_.params.fluid_model != FluidModel::Frozen) limit = std::min(limit, fluid_.dt_limit(state_.velocity));
  if (config_.run.dt) {
    dt_ = *config_.run.dt;
  } else if (dt_ == 0.0 || dt_ > 0.9 * limit) {
    dt_ = 0.9 * limit;
  }
  return dt_;
}

const DiagnosticsRecord& Simulation::step(std::optional<double> stop_time) {
  double dt = next_dt();
  if (stop_time && state_.t + dt > *stop_time) dt = *stop_time - state_.t;
  if (!(dt > 0.0)) throw ConfigError("no time left to step", "run.t_end");

  const auto& species = config_.species;
  const auto& params = config_.params;
  SimState backup = state_;
  const auto shadow_backup = shadow_;
  const auto regularity_backup = regularity_;
  const auto mixed_backup = mixed_;
  double divergence = 0.0;
  try {
    StaggeredVectorField force(grid_);
    if (params.fluid_model != FluidModel::Frozen) {
      force = electric_force(charge_density(state_, species), state_.potential, params.K);
    }
    regularity_.accumulate(current_.grad_u_sq, dt);
    if (mixed_) mixed_->accumulate(state_, species, dt);
    if (shadow_) rho_sigma_step(*shadow_, state_.potential, state_.velocity, shadow_z_, shadow_D_, dt);
    advance_concentrations(state_, species, dt);
    divergence = fluid_step(state_, fluid_, params, force, dt).divergence_after;
    state_.t += dt;
    ++state_.step;
    solve_potential();
  } catch (...) {
    state_ = std::move(backup);
    shadow_ = shadow_backup;
    regularity_ = regularity_backup;
    mixed_ = mixed_backup;
    throw;
  }

  const double v_before = current_.V;
  const double d_before = current_.dissipation;
  const double g_before = current_.grad_u_sq;
  build_record();
  current_.budget_residual = energy_budget_residual(v_before, current_.V, d_before, g_before, dt, params);
  last_dt_ = dt;

  max_abs_residual_ = std::max(max_abs_residual_, std::abs(*current_.budget_residual));
  for (std::size_t s = 0; s < species.size(); ++s) {
    const double ref = initial_mass_[s] != 0.0 ? std::abs(initial_mass_[s]) : 1.0;
    max_drift_[s] = std::max(max_drift_[s], std::abs(current_.mass[s] - initial_mass_[s]) / ref);
  }
  min_concentration_ = std::min(min_concentration_, state_.min_concentration());
  max_divergence_ = std::max(max_divergence_, divergence);
  shadow_dev_max_ = std::max(shadow_dev_max_, shadow_dev_);
  return current_;
}

RunSummary Simulation::summary() const {
  RunSummary s;
  s.steps = state_.step;
  s.t = state_.t;
  s.dt = dt_;
  s.max_abs_budget_residual = max_abs_residual_;
  s.max_relative_mass_drift = max_drift_;
  s.min_concentration = min_concentration_;
  s.U_T = regularity_.value();
  s.max_divergence = max_divergence_;
  s.rho_sigma_deviation = shadow_ ? shadow_dev_max_ : std::numeric_limits<double>::quiet_NaN();
  return s;
}

void Simulation::write_header(std::ostream& out, const SimConfig& config, double dt) {
  const std::size_t m = config.species.size();
  nlohmann::json keys = nlohmann::json::array();
  keys.push_back("t");
  keys.push_back("step");
  for (const char* base : {"mass", "l2", "linf"}) {
    for (std::size_t i = 0; i < m; ++i) keys.push_back(std::string(base) + "." + std::to_string(i));
  }
  for (const char* k : {"V", "Diss", "grad_u_sq", "u_sq", "U_T", "budget_residual"}) keys.push_back(k);
  for (std::size_t i = 0; i < m; ++i) keys.push_back("mu_var." + std::to_string(i));
  for (const char* k : {"Q", "phi_h1", "mu_var_flag", "dt"}) keys.push_back(k);
  if (MixedBcMonitor::applies(config.species)) {
    for (const char* k : {"q1_l2", "c2_l1", "rho_sq_int"}) keys.push_back(k);
  }
  if (config.run.rho_sigma_shadow) keys.push_back("rho_sigma_dev");
  nlohmann::json species = nlohmann::json::array();
  for (const auto& s : config.species) species.push_back(s.name);
  nlohmann::json header{{"record", "header"},
                        {"format", "npsim-diagnostics"},
                        {"version", 1},
                        {"species", species},
                        {"keys", keys},
                        {"dt", dt},
                        {"sample_every", config.run.sample_every}};
  out << header.dump() << '\n';
}

void Simulation::write_record(std::ostream& out, const DiagnosticsRecord& r, const SimConfig& config, double dt,
                              std::optional<double> rho_sigma_dev) {
  std::string line = "{";
  bool first = true;
  auto put = [&](const std::string& key, const std::string& value) {
    if (!first) line += ',';
    first = false;
    line += '"';
    line += key;
    line += "\":";
    line += value;
  };
  auto num = [&](const std::string& key, double v) { put(key, format_number(v)); };
  num("t", r.t);
  put("step", std::to_string(r.step));
  for (std::size_t i = 0; i < r.mass.size(); ++i) num("mass." + std::to_string(i), r.mass[i]);
  for (std::size_t i = 0; i < r.l2.size(); ++i) num("l2." + std::to_string(i), r.l2[i]);
  for (std::size_t i = 0; i < r.linf.size(); ++i) num("linf." + std::to_string(i), r.linf[i]);
  num("V", r.V);
  num("Diss", r.dissipation);
  num("grad_u_sq", r.grad_u_sq);
  num("u_sq", r.u_sq);
  num("U_T", r.U_T);
  put("budget_residual", r.budget_residual ? format_number(*r.budget_residual) : "null");
  for (std::size_t i = 0; i < r.mu_var.size(); ++i) num("mu_var." + std::to_string(i), r.mu_var[i]);
  num("Q", r.Q);
  num("phi_h1", r.phi_h1);
  put("mu_var_flag", r.mu_var_flag ? "true" : "false");
  num("dt", dt);
  if (r.mixed) {
    num("q1_l2", r.mixed->q1_l2);
    num("c2_l1", r.mixed->c2_l1);
    num("rho_sq_int", r.mixed->rho_sq_integral);
  }
  if (config.run.rho_sigma_shadow && rho_sigma_dev) num("rho_sigma_dev", *rho_sigma_dev);
  line += "}\n";
  out << line;
}

void Simulation::dump_fields(const std::string& dir) const {
  const int d = grid_.dim();
  std::vector<int> shape(grid_.cells().begin(), grid_.cells().begin() + d);
  for (std::size_t s = 0; s < state_.concentrations.size(); ++s) {
    write_field_dump(dir, "c." + std::to_string(s), grid_, shape, state_.t, state_.step,
                     state_.concentrations[s].interior());
  }
  write_field_dump(dir, "phi", grid_, shape, state_.t, state_.step, state_.potential.interior());
  write_field_dump(dir, "p", grid_, shape, state_.t, state_.step, state_.pressure.interior());
  for (int a = 0; a < d; ++a) {
    auto face_shape = shape;
    face_shape[a] += 1;
    write_field_dump(dir, "u." + std::to_string(a), grid_, face_shape, state_.t, state_.step,
                     state_.velocity.component(a));
  }
}

void Simulation::write_summary(const std::string& dir, const RunSummary& s) const {
  auto num = [](double v) -> nlohmann::json {
    if (!std::isfinite(v)) return nullptr;
    return v;
  };
  nlohmann::json drift = nlohmann::json::array();
  for (double v : s.max_relative_mass_drift) drift.push_back(num(v));
  nlohmann::json j{{"steps", s.steps},
                   {"t", s.t},
                   {"dt", s.dt},
                   {"max_abs_budget_residual", num(s.max_abs_budget_residual)},
                   {"max_relative_mass_drift", drift},
                   {"min_concentration", num(s.min_concentration)},
                   {"U_T", num(s.U_T)},
                   {"max_divergence", num(s.max_divergence)},
                   {"rho_sigma_deviation", num(s.rho_sigma_deviation)},
                   {"exit_code", s.exit_code}};
  write_text(dir + "/summary.json", j.dump(2) + "\n");
}

RunSummary Simulation::run(const RunOptions& options) {
  const double stop = options.until.value_or(config_.run.t_end);
  const std::string out_dir = options.out_dir.value_or(config_.output.directory);
  const bool write = options.write_outputs;
  const auto every = static_cast<std::uint64_t>(config_.run.sample_every);
  std::string ckpt_path = config_.checkpoint_path();
  if (options.out_dir && config_.checkpoint.path.empty()) ckpt_path = out_dir + "/checkpoint.bin";

  std::ofstream stream;
  if (write) {
    std::filesystem::create_directories(out_dir);
    if (config_.output.diagnostics) {
      stream.open(out_dir + "/diagnostics.jsonl", std::ios::trunc);
      if (!stream) throw Error("sim_orchestrator", "cannot open diagnostics stream in '" + out_dir + "'");
      write_header(stream, config_, dt_);
    }
  }
  auto rho_sigma = [&]() -> std::optional<double> {
    if (shadow_) return shadow_dev_;
    return std::nullopt;
  };
  auto emit = [&]() {
    if (stream.is_open()) write_record(stream, current_, config_, last_dt_, rho_sigma());
    if (options.on_sample) options.on_sample(current_);
  };
  if (state_.step % every == 0) emit();

  RunSummary result;
  try {
    while (state_.t < stop - stop_slack(stop)) {
      if (options.stop_at_step && state_.step >= *options.stop_at_step) break;
      step(stop);
      if (options.on_step) options.on_step(current_);
      const bool last = state_.t >= stop - stop_slack(stop) ||
                        (options.stop_at_step && state_.step >= *options.stop_at_step);
      if (state_.step % every == 0 || last) emit();
      if (write && config_.output.fields && config_.output.field_every > 0 &&
          state_.step % static_cast<std::uint64_t>(config_.output.field_every) == 0) {
        dump_fields(out_dir + "/fields/" + step_dir(state_.step));
      }
      if (write && config_.checkpoint.every_n_steps > 0 && state_.step % config_.checkpoint.every_n_steps == 0) {
        save_checkpoint(ckpt_path);
      }
    }
    result = summary();
  } catch (const std::exception& e) {
    result = summary();
    result.exit_code = exit_code_for(e);
    const auto* err = dynamic_cast<const Error*>(&e);
    result.error_module = err ? err->module() : "sim_orchestrator";
    result.error_message = e.what();
    if (write) {
      const std::string abort_path = out_dir + "/abort_checkpoint.bin";
      save_checkpoint(abort_path);
      nlohmann::json rec{{"record", "error"},
                         {"step", state_.step},
                         {"t", state_.t},
                         {"module", result.error_module},
                         {"reason", result.error_message},
                         {"exit_code", result.exit_code},
                         {"checkpoint", abort_path}};
      write_text(out_dir + "/error.json", rec.dump(2) + "\n");
      if (stream.is_open()) stream << rec.dump() << '\n';
    }
  }
  if (stream.is_open()) stream.flush();
  if (write) {
    if (config_.output.fields) dump_fields(out_dir + "/fields/final");
    write_summary(out_dir, result);
  }
  return result;
}

std::vector<unsigned char> Simulation::checkpoint_bytes() const {
  ByteWriter w;
  w.raw(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(kMagic), sizeof kMagic));
  w.u32(kCheckpointVersion);
  w.str(to_json(config_, -1));
  w.u64(state_.step);
  w.f64(state_.t);
  w.f64(dt_);
  w.f64(last_dt_);
  w.f64(regularity_.value());
  w.f64(mixed_ ? mixed_->rho_sq_integral() : 0.0);
  w.f64(max_abs_residual_);
  w.f64(min_concentration_);
  w.f64(max_divergence_);
  w.f64(shadow_dev_max_);
  w.u8(current_.budget_residual ? 1 : 0);
  w.f64(current_.budget_residual.value_or(0.0));
  w.u64(initial_mass_.size());
  w.f64s(initial_mass_);
  w.f64s(max_drift_);

  struct Entry {
    std::string name;
    std::span<const double> data;
    bool ghosts;
  };
  std::vector<Entry> fields;
  for (std::size_t s = 0; s < state_.concentrations.size(); ++s) {
    const auto& c = state_.concentrations[s];
    fields.push_back({"c." + std::to_string(s), c.raw(), c.ghosts_ready()});
  }
  fields.push_back({"phi", state_.potential.raw(), state_.potential.ghosts_ready()});
  fields.push_back({"p", state_.pressure.raw(), state_.pressure.ghosts_ready()});
  for (int a = 0; a < 3; ++a) fields.push_back({"u." + std::to_string(a), state_.velocity.component(a), false});
  if (shadow_) {
    fields.push_back({"shadow.rho", shadow_->rho.raw(), shadow_->rho.ghosts_ready()});
    fields.push_back({"shadow.sigma", shadow_->sigma.raw(), shadow_->sigma.ghosts_ready()});
  }
  w.u64(fields.size());
  for (const auto& f : fields) {
    w.str(f.name);
    w.u8(f.ghosts ? 1 : 0);
    w.u64(f.data.size());
    w.f64s(f.data);
  }
  auto bytes = w.bytes();
  ByteWriter tail;
  tail.u64(fnv1a64(bytes));
  bytes.insert(bytes.end(), tail.bytes().begin(), tail.bytes().end());
  return bytes;
}

void Simulation::save_checkpoint(const std::string& path) const { write_file_atomic(path, checkpoint_bytes()); }

Simulation Simulation::from_checkpoint(const std::string& path) {
  const auto bytes = read_file(path);
  return from_checkpoint_bytes(bytes);
}

Simulation Simulation::from_checkpoint_bytes(std::span<const unsigned char> bytes) {
  if (bytes.size() < sizeof kMagic + 12) throw Error("checkpoint", "checkpoint is truncated");
  const auto body = bytes.first(bytes.size() - 8);
  ByteReader tail(bytes.last(8));
  if (tail.u64() != fnv1a64(body)) throw InvariantViolation("checkpoint", "checkpoint checksum mismatch");
  ByteReader r(body);
  const auto magic = r.take(sizeof kMagic);
  if (!std::equal(magic.begin(), magic.end(), reinterpret_cast<const unsigned char*>(kMagic))) {
    throw Error("checkpoint", "not an npsim checkpoint");
  }
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw Error("checkpoint", "unsupported checkpoint version " + std::to_string(version));
  }
  Simulation sim(parse_config(r.str()), Restore{});
  sim.state_.step = r.u64();
  sim.state_.t = r.f64();
  sim.dt_ = r.f64();
  sim.last_dt_ = r.f64();
  sim.regularity_.reset(r.f64());
  const double mixed_integral = r.f64();
  if (sim.mixed_) sim.mixed_->restore(mixed_integral);
  const double max_abs_residual = r.f64();
  const double min_concentration = r.f64();
  const double max_divergence = r.f64();
  const double shadow_dev_max = r.f64();
  const bool has_residual = r.u8() != 0;
  const double residual = r.f64();
  const auto m = r.u64();
  if (m != sim.config_.species.size()) throw Error("checkpoint", "species count does not match the config echo");
  sim.initial_mass_ = r.f64s(m);
  sim.max_drift_ = r.f64s(m);
  if (sim.config_.run.rho_sigma_shadow) sim.shadow_ = RhoSigmaFields{ScalarField(sim.grid_), ScalarField(sim.grid_)};

  const auto count = r.u64();
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name = r.str();
    const bool ghosts = r.u8() != 0;
    const auto n = r.u64();
    auto values = r.f64s(n);
    std::span<double> target;
    ScalarField* scalar = nullptr;
    if (name.rfind("c.", 0) == 0) {
      const auto s = std::stoul(name.substr(2));
      if (s >= sim.state_.concentrations.size()) throw Error("checkpoint", "unexpected field " + name);
      scalar = &sim.state_.concentrations[s];
    } else if (name == "phi") {
      scalar = &sim.state_.potential;
    } else if (name == "p") {
      scalar = &sim.state_.pressure;
    } else if (name.rfind("u.", 0) == 0) {
      target = sim.state_.velocity.component(std::stoi(name.substr(2)));
    } else if (name == "shadow.rho" && sim.shadow_) {
      scalar = &sim.shadow_->rho;
    } else if (name == "shadow.sigma" && sim.shadow_) {
      scalar = &sim.shadow_->sigma;
    } else {
      throw Error("checkpoint", "unexpected field " + name);
    }
    if (scalar) {
      target = scalar->raw();
      scalar->set_ghosts_ready(ghosts);
    }
    if (target.size() != values.size()) throw Error("checkpoint", "field " + name + " has the wrong length");
    std::copy(values.begin(), values.end(), target.begin());
  }
  if (r.remaining() != 0) throw Error("checkpoint", "trailing bytes in checkpoint");

  sim.build_record();
  if (has_residual) sim.current_.budget_residual = residual;
  sim.max_abs_residual_ = max_abs_residual;
  sim.min_concentration_ = min_concentration;
  sim.max_divergence_ = max_divergence;
  sim.shadow_dev_max_ = shadow_dev_max;
  return sim;
}

RunSummary run_config(const SimConfig& config, const RunOptions& options) {
  try {
    Simulation sim(config);
    return sim.run(options);
  } catch (const std::exception& e) {
    RunSummary s;
    s.exit_code = exit_code_for(e);
    const auto* err = dynamic_cast<const Error*>(&e);
    s.error_module = err ? err->module() : "sim_orchestrator";
    s.error_message = e.what();
    return s;
  }
}

RunSummary resume_checkpoint(const std::string& path, const RunOptions& options) {
  try {
    auto sim = Simulation::from_checkpoint(path);
    return sim.run(options);
  } catch (const std::exception& e) {
    RunSummary s;
    s.exit_code = exit_code_for(e);
    const auto* err = dynamic_cast<const Error*>(&e);
    s.error_module = err ? err->module() : "checkpoint";
    s.error_message = e.what();
    return s;
  }
}

}  // namespace npsim
