#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "npsim/config.hpp"
#include "npsim/errors.hpp"
#include "npsim/io.hpp"
#include "npsim/scenario.hpp"
#include "npsim/simulation.hpp"
#include "npsim/verification.hpp"

namespace {

using namespace npsim;

int report(const RunSummary& s) {
  nlohmann::json drift = nlohmann::json::array();
  for (double v : s.max_relative_mass_drift) drift.push_back(nlohmann::json::parse(format_number(v)));
  nlohmann::json j{{"steps", s.steps},
                   {"t", s.t},
                   {"dt", s.dt},
                   {"max_abs_budget_residual", nlohmann::json::parse(format_number(s.max_abs_budget_residual))},
                   {"max_relative_mass_drift", drift},
                   {"min_concentration", nlohmann::json::parse(format_number(s.min_concentration))},
                   {"U_T", nlohmann::json::parse(format_number(s.U_T))},
                   {"exit_code", s.exit_code}};
  std::cout << j.dump() << '\n';
  if (s.exit_code != kExitOk) std::cerr << "error [" << s.error_module << "]: " << s.error_message << '\n';
  return s.exit_code;
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    std::cerr << "error [" << e.module() << "]: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-preserving Nernst-Planck-Stokes simulator"};
  app.require_subcommand(1);

  std::string config_path, scenario_name, out_dir, checkpoint_path, suite, case_name;
  std::optional<double> until;
  bool print_config = false, list = false, json_out = false;

  auto* simulate = app.add_subcommand("simulate", "Run a configuration");
  auto* cfg_opt = simulate->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  simulate->add_option("--scenario", scenario_name, "Built-in scenario instead of a file")->excludes(cfg_opt);
  simulate->add_option("--out", out_dir, "Output directory (overrides output.directory)");
  simulate->add_option("--until", until, "Stop time (overrides run.t_end)");

  auto* resume = app.add_subcommand("resume", "Continue a run from a checkpoint");
  resume->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required()->check(CLI::ExistingFile);
  resume->add_option("--out", out_dir, "Output directory (default: <checkpoint dir>/resumed)");
  resume->add_option("--until", until, "Stop time (overrides run.t_end)");

  auto* scen = app.add_subcommand("scenario", "Inspect built-in scenarios");
  scen->add_option("--name", scenario_name, "Scenario name");
  scen->add_flag("--print-config", print_config, "Print the scenario's configuration as JSON");
  scen->add_flag("--list", list, "List scenario names");

  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("--suite", suite, "poisson, np, fluid, energy, trace, rho-sigma or all")->required();
  verify->add_flag("--json", json_out, "Print one JSON record per suite instead of text");

  auto* conv = app.add_subcommand("convergence", "Run a manufactured-solution convergence study");
  conv->add_option("--case", case_name, "poisson_robin, diffusion_blocking, advection_diffusion_frozen_u or all")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (simulate->parsed()) {
    return guarded([&] {
      if (config_path.empty() && scenario_name.empty()) throw ConfigError("simulate needs --config or --scenario");
      const SimConfig config = config_path.empty() ? scenario(scenario_name) : load_config(config_path);
      RunOptions opts;
      opts.until = until;
      if (!out_dir.empty()) opts.out_dir = out_dir;
      return report(run_config(config, opts));
    });
  }
  if (resume->parsed()) {
    return guarded([&] {
      RunOptions opts;
      opts.until = until;
      opts.out_dir = out_dir.empty()
                         ? (std::filesystem::path(checkpoint_path).parent_path() / "resumed").string()
                         : out_dir;
      return report(resume_checkpoint(checkpoint_path, opts));
    });
  }
  if (scen->parsed()) {
    return guarded([&] {
      if (list || scenario_name.empty()) {
        for (const auto& n : scenario_names()) std::cout << n << '\n';
        return kExitOk;
      }
      const auto config = scenario(scenario_name);
      if (print_config) {
        std::cout << to_json(config) << '\n';
      } else {
        std::cout << scenario_name << ": " << config.species.size() << " species, " << config.grid.cells[0] << "x"
                  << config.grid.cells[1] << " cells, t_end " << config.run.t_end << '\n';
      }
      return kExitOk;
    });
  }
  if (verify->parsed()) {
    return guarded([&] {
      bool ok = true;
      const auto names = suite == "all" ? suite_names() : std::vector<std::string>{suite};
      for (const auto& n : names) {
        const auto r = run_suite(n);
        std::cout << (json_out ? suite_record(r) + "\n" : format_suite(r));
        ok = ok && r.passed();
      }
      return ok ? kExitOk : kExitInvariant;
    });
  }
  if (conv->parsed()) {
    return guarded([&] {
      bool ok = true;
      const auto names = case_name == "all" ? mms_case_names() : std::vector<std::string>{case_name};
      for (const auto& n : names) {
        for (const auto& r : mms_convergence(n)) {
          std::cout << format_report(r);
          ok = ok && r.passed;
        }
      }
      return ok ? kExitOk : kExitInvariant;
    });
  }
  return kExitOk;
}
