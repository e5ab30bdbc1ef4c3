#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "npsim/errors.hpp"
#include "npsim/io.hpp"
#include "npsim/scenario.hpp"
#include "npsim/simulation.hpp"
#include "support.hpp"

using namespace npsim;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("npsim_sim_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

SimConfig small_relaxation(int n = 16) {
  auto c = scenario("two_species_relaxation");
  c.grid.cells = {n, n, 1};
  c.run.sample_every = 4;
  return c;
}

SimConfig electroneutral() {
  auto c = small_relaxation(12);
  for (auto& s : c.species) s.initial = ProfileSpec{ProfileKind::Uniform, 1.0};
  return c;
}

std::vector<std::string> lines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> data_records(const fs::path& path) {
  std::vector<std::string> out;
  for (const auto& l : lines(path)) {
    if (l.find("\"record\"") == std::string::npos) out.push_back(l);
  }
  return out;
}

}  // namespace

TEST_SUITE("sim_orchestrator") {
  TEST_CASE("exit codes") {
    CHECK(exit_code_for(ConfigError("x")) == kExitConfig);
    CHECK(exit_code_for(SolverError("poisson_robin", "x", 1.0, 3)) == kExitSolver);
    CHECK(exit_code_for(InvariantViolation("nernst_planck", "x")) == kExitInvariant);
    CHECK(exit_code_for(NegativeConcentration("x", 0, 1, -1.0, 0.1)) == kExitInvariant);
  }

  TEST_CASE("electroneutral uniform state is a steady state") {
    Simulation sim(electroneutral());
    std::vector<DiagnosticsRecord> recs;
    RunOptions opts;
    opts.write_outputs = false;
    opts.until = 0.05;
    opts.on_step = [&](const DiagnosticsRecord& r) { recs.push_back(r); };
    const auto s = sim.run(opts);
    CHECK(s.exit_code == kExitOk);
    REQUIRE(recs.size() > 10);
    for (const auto& r : recs) {
      CHECK(std::abs(r.V - recs.front().V) <= 1e-12);
      CHECK(r.u_sq == 0.0);
      CHECK(r.dissipation <= 1e-24);
      CHECK(std::abs(*r.budget_residual) <= 1e-10);
      CHECK(r.mass[0] == Approx(recs.front().mass[0]).epsilon(1e-15));
    }
    CHECK(s.max_abs_budget_residual <= 1e-10);
    CHECK(s.min_concentration == Approx(1.0));
  }

  TEST_CASE("every step conserves mass, stays positive, divergence-free and shut at the walls") {
    Simulation sim(small_relaxation());
    const double m0 = sim.current().mass[0];
    RunOptions opts;
    opts.write_outputs = false;
    opts.until = 0.02;
    int steps = 0;
    opts.on_step = [&](const DiagnosticsRecord& r) {
      ++steps;
      CHECK(std::abs(r.mass[0] - m0) <= 1e-13 * m0);
      CHECK(sim.state().min_concentration() >= 0.0);
      CHECK(sim.state().velocity.max_boundary_normal() == 0.0);
      CHECK(sim.state().velocity.max_abs_divergence() <= 1e-10);
    };
    const auto s = sim.run(opts);
    CHECK(s.exit_code == kExitOk);
    CHECK(steps > 10);
    CHECK(s.t == 0.02);
    CHECK(sim.state().t == 0.02);
    CHECK(s.max_divergence <= 1e-10);
  }

  TEST_CASE("the last step is truncated to land on the stop time") {
    auto c = small_relaxation(8);
    c.run.dt = 3e-4;
    c.run.t_end = 1e-3;
    Simulation sim(c);
    RunOptions opts;
    opts.write_outputs = false;
    const auto s = sim.run(opts);
    CHECK(s.steps == 4);
    CHECK(sim.state().t == 1e-3);
  }

  TEST_CASE("a fixed dt above the positivity limit aborts with a record and checkpoint") {
    auto c = small_relaxation(16);
    c.run.dt = 0.01;
    const auto dir = scratch("abort");
    RunOptions opts;
    opts.out_dir = dir.string();
    const auto s = run_config(c, opts);
    CHECK(s.exit_code == kExitInvariant);
    CHECK(s.error_module == "nernst_planck");
    CHECK(fs::exists(dir / "error.json"));
    CHECK(fs::exists(dir / "abort_checkpoint.bin"));
    const auto err = nlohmann::json::parse(std::ifstream(dir / "error.json"));
    CHECK(err["module"] == "nernst_planck");
    CHECK(err["exit_code"] == kExitInvariant);
    CHECK(err["step"] == 0);

    Simulation sim(c);
    const auto before = sim.checkpoint_bytes();
    CHECK_THROWS_AS(sim.step(), InvariantViolation);
    CHECK(sim.checkpoint_bytes() == before);
    fs::remove_all(dir);
  }

  TEST_CASE("checkpoint bytes round trip exactly") {
    Simulation sim(scenario("mixed_small_anion"));
    for (int n = 0; n < 5; ++n) sim.step();
    const auto bytes = sim.checkpoint_bytes();
    CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "NPSIMCKP");
    const auto back = Simulation::from_checkpoint_bytes(bytes);
    CHECK(back.checkpoint_bytes() == bytes);
    CHECK(back.state().step == 5);
    CHECK(back.current().V == sim.current().V);

    auto flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x10;
    CHECK_THROWS_AS(Simulation::from_checkpoint_bytes(flipped), InvariantViolation);
    const std::vector<unsigned char> cut(bytes.begin(), bytes.begin() + 10);
    CHECK_THROWS_AS(Simulation::from_checkpoint_bytes(cut), Error);
  }

  TEST_CASE("resumed stream is bit-identical to the uninterrupted run") {
    auto c = small_relaxation(16);
    c.run.t_end = 0.05;
    c.checkpoint.every_n_steps = 12;
    const auto full = scratch("full");
    const auto half = scratch("half");
    RunOptions a;
    a.out_dir = full.string();
    REQUIRE(run_config(c, a).exit_code == kExitOk);

    RunOptions b;
    b.out_dir = half.string();
    b.stop_at_step = 12;
    REQUIRE(run_config(c, b).exit_code == kExitOk);
    RunOptions r;
    r.out_dir = (half / "resumed").string();
    const auto resumed = resume_checkpoint((half / "checkpoint.bin").string(), r);
    REQUIRE(resumed.exit_code == kExitOk);

    const auto whole = data_records(full / "diagnostics.jsonl");
    const auto tail = data_records(half / "resumed" / "diagnostics.jsonl");
    REQUIRE(tail.size() > 3);
    REQUIRE(whole.size() > tail.size());
    const auto first = nlohmann::json::parse(tail.front());
    CHECK(first["step"] == 12);
    std::size_t k = 0;
    while (k < whole.size() && nlohmann::json::parse(whole[k])["step"] != 12) ++k;
    REQUIRE(k + tail.size() == whole.size());
    for (std::size_t i = 0; i < tail.size(); ++i) CHECK(tail[i] == whole[k + i]);
    CHECK(read_file((full / "checkpoint.bin").string()) == read_file((half / "resumed" / "checkpoint.bin").string()));
    fs::remove_all(full);
    fs::remove_all(half);
  }

  TEST_CASE("diagnostics stream layout") {
    const auto dir = scratch("stream");
    auto c = small_relaxation(8);
    c.run.t_end = 2e-3;
    c.output.fields = true;
    RunOptions opts;
    opts.out_dir = dir.string();
    REQUIRE(run_config(c, opts).exit_code == kExitOk);
    const auto all = lines(dir / "diagnostics.jsonl");
    const auto header = nlohmann::json::parse(all.front());
    CHECK(header["record"] == "header");
    CHECK(header["format"] == "npsim-diagnostics");
    CHECK(header["species"].size() == 2);
    const std::vector<std::string> keys = header["keys"];
    const auto first = nlohmann::ordered_json::parse(all[1]);
    std::vector<std::string> order;
    for (const auto& [k, v] : first.items()) order.push_back(k);
    CHECK(std::vector<std::string>(order.begin(), order.begin() + keys.size()) == keys);
    CHECK(first["budget_residual"].is_null());
    CHECK(nlohmann::json::parse(all[2])["budget_residual"].is_number());

    const auto recs = read_diagnostics((dir / "diagnostics.jsonl").string());
    CHECK(recs.back().at("t") == 2e-3);
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(fs::exists(dir / "fields" / "final"));
    fs::remove_all(dir);
  }

  TEST_CASE("equal diffusivity shadow tracks the species") {
    auto c = scenario("equal_diffusivity_m3");
    c.grid.cells = {12, 12, 1};
    Simulation sim(c);
    REQUIRE(sim.shadow().has_value());
    RunOptions opts;
    opts.write_outputs = false;
    opts.stop_at_step = 50;
    const auto s = sim.run(opts);
    CHECK(s.exit_code == kExitOk);
    CHECK(s.rho_sigma_deviation <= 1e-10);
  }

  TEST_CASE("mixed walls keep the blocking anion mass") {
    auto c = scenario("mixed_small_anion");
    c.grid.cells = {12, 12, 1};
    Simulation sim(c);
    const double c2 = sim.current().mixed->c2_l1;
    RunOptions opts;
    opts.write_outputs = false;
    opts.stop_at_step = 100;
    opts.on_step = [&](const DiagnosticsRecord& r) {
      REQUIRE(r.mixed.has_value());
      CHECK(std::abs(r.mixed->c2_l1 - c2) <= 1e-11 * c2);
    };
    CHECK(sim.run(opts).exit_code == kExitOk);
    CHECK(sim.current().mixed->rho_sq_integral > 0.0);
  }
}
