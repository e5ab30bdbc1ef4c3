#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "npsim/config.hpp"
#include "npsim/errors.hpp"
#include "npsim/io.hpp"
#include "npsim/scenario.hpp"
#include "support.hpp"

using namespace npsim;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "grid": {"dim": 2, "cells": [8, 8], "lengths": [1, 1]},
  "species": [
    {"name": "cation", "valence": 1, "diffusivity": 1},
    {"name": "anion", "valence": -1, "diffusivity": 1}
  ],
  "run": {"t_end": 0.1}
})";

std::string with(const std::string& replace, const std::string& by) {
  std::string s = kMinimal;
  const auto at = s.find(replace);
  REQUIRE(at != std::string::npos);
  return s.replace(at, replace.size(), by);
}

template <class F>
std::pair<std::string, std::string> config_error(F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return {e.what(), e.key()};
  }
  FAIL("expected a ConfigError");
  return {};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("npsim_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("config_io") {
  TEST_CASE("defaults of a minimal config") {
    const auto c = parse_config(kMinimal);
    CHECK(c.params.fluid_model == FluidModel::NPS);
    CHECK_FALSE(c.run.dt.has_value());
    CHECK(c.run.sample_every == 10);
    CHECK(c.params.tau == 1.0);
    CHECK(c.species[0].bc == SpeciesBc::Blocking);
    CHECK(c.xi.kind == XiKind::Constant);
    CHECK(c.xi.value == 0.0);
    CHECK(c.output.diagnostics);
    CHECK(c.checkpoint.every_n_steps == 0);
    CHECK(c.checkpoint_path() == "out/checkpoint.bin");
  }

  TEST_CASE("echo round trips") {
    for (const auto& name : scenario_names()) {
      const auto c = scenario(name);
      const auto text = to_json(c);
      CHECK(to_json(parse_config(text)) == text);
    }
    auto c = parse_config(with(R"("run": {"t_end": 0.1})", R"("run": {"t_end": 0.1, "dt": 0.001, "seed": 9})"));
    REQUIRE(c.run.dt.has_value());
    CHECK(*c.run.dt == 0.001);
    CHECK(to_json(parse_config(to_json(c))) == to_json(c));
  }

  TEST_CASE("rejections name the reason and the key") {
    auto [tau_msg, tau_key] = config_error([] {
      parse_config(with(R"("run")", R"("params": {"tau": 0}, "run")"));
    });
    CHECK(tau_key == "params.tau");
    CHECK(tau_msg.find("Robin") != std::string::npos);

    auto [typo_msg, typo_key] = config_error([] {
      parse_config(with(R"("run")", R"("params": {"viscocity": 1}, "run")"));
    });
    CHECK(typo_msg.find("viscocity") != std::string::npos);

    auto [gamma_msg, gamma_key] = config_error([] {
      parse_config(with(R"("diffusivity": 1},)", R"("diffusivity": 1, "bc": "dirichlet", "gamma": 0},)"));
    });
    CHECK(gamma_key.find("gamma") != std::string::npos);

    auto [d_msg, d_key] = config_error([] {
      parse_config(with(R"("valence": -1, "diffusivity": 1)", R"("valence": -1, "diffusivity": -2)"));
    });
    CHECK(d_key.find("diffusivity") != std::string::npos);

    auto [syntax_msg, syntax_key] = config_error([] { parse_config("{\n  \"grid\": {\"dim\": 2,,}\n}"); });
    CHECK(syntax_msg.find("line 2") != std::string::npos);
    CHECK(syntax_msg.find("column") != std::string::npos);

    CHECK_THROWS_AS(parse_config(with(R"("dim": 2)", R"("dim": 4)")), ConfigError);
    CHECK_THROWS_AS(parse_config(with(R"("cells": [8, 8])", R"("cells": [8, 1])")), ConfigError);
    CHECK_THROWS_AS(parse_config(with(R"("t_end": 0.1)", R"("t_end": -1)")), ConfigError);
    CHECK_THROWS_AS(parse_config(with(R"("t_end": 0.1)", R"("t_end": 0.1, "sample_every": 0)")), ConfigError);
    CHECK_THROWS_AS(parse_config(with(R"("t_end": 0.1)", R"("t_end": 0.1, "dt": -0.5)")), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/npsim.json"), ConfigError);
  }

  TEST_CASE("fnv1a and number formatting") {
    CHECK(fnv1a64({}) == 0xcbf29ce484222325ULL);
    const unsigned char a[] = {'a'};
    CHECK(fnv1a64(a) == 0xaf63dc4c8601ec8cULL);
    const std::string foobar = "foobar";
    CHECK(fnv1a64({reinterpret_cast<const unsigned char*>(foobar.data()), foobar.size()}) == 0x85944171f73967e8ULL);
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(2.0) == "2");
    CHECK(format_number(std::nan("")) == "null");
    CHECK(format_number(INFINITY) == "null");
    for (double v : {1.0 / 3.0, -2.5e-300, 6.02214076e23, 5e-324}) CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
  }

  TEST_CASE("byte codec") {
    ByteWriter w;
    w.u8(7);
    w.u32(0xdeadbeef);
    w.u64(1ULL << 60);
    w.f64(-0.0);
    w.f64s(std::vector<double>{1.5, std::nan(""), 1e-310});
    w.str("species/anion");
    CHECK(w.bytes()[1] == 0xef);
    ByteReader r(w.bytes());
    CHECK(r.u8() == 7);
    CHECK(r.u32() == 0xdeadbeef);
    CHECK(r.u64() == 1ULL << 60);
    CHECK(std::signbit(r.f64()));
    const auto v = r.f64s(3);
    CHECK(v[0] == 1.5);
    CHECK(std::isnan(v[1]));
    CHECK(v[2] == 1e-310);
    CHECK(r.str() == "species/anion");
    CHECK(r.remaining() == 0);
    CHECK_THROWS_AS(r.u8(), Error);
  }

  TEST_CASE("field dumps round trip and detect tampering") {
    const auto dir = scratch("dump");
    const Grid g(2, {5, 3, 1}, {1.0, 0.6, 1.0});
    const auto values = test::random_values(g.cell_count(), 4);
    const int shape[] = {5, 3};
    write_field_dump(dir.string(), "phi", g, shape, 0.5, 12, values);
    CHECK(read_field_dump(dir.string(), "phi") == values);
    CHECK(fs::file_size(dir / "phi.bin") == values.size() * 8);

    auto bytes = read_file((dir / "phi.bin").string());
    bytes[9] ^= 0x01;
    write_file_atomic((dir / "phi.bin").string(), bytes);
    CHECK_THROWS_AS(read_field_dump(dir.string(), "phi"), Error);
    fs::remove_all(dir);
  }

  TEST_CASE("diagnostics reader skips headers and maps null to NaN") {
    const auto dir = scratch("jsonl");
    const auto path = (dir / "d.jsonl").string();
    std::ofstream(path) << R"({"record":"header","format":"npsim-diagnostics"})" << '\n'
                        << R"({"t":0,"step":0,"mass.1":2.5,"budget_residual":null})" << '\n'
                        << R"({"t":0.1,"step":1,"mass.1":2.5,"budget_residual":1e-3})" << '\n';
    const auto recs = read_diagnostics(path);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].at("mass.1") == 2.5);
    CHECK(std::isnan(recs[0].at("budget_residual")));
    CHECK(recs[1].at("step") == 1.0);
    fs::remove_all(dir);
  }

  TEST_CASE("boundary data generators") {
    const Grid g(2, {4, 2, 1}, {2.0, 1.0, 1.0});
    XiSpec lin;
    lin.kind = XiKind::Linear;
    lin.value = 0.5;
    lin.slope = -2.0;
    const auto xi = sample_xi(g, lin);
    REQUIRE(xi.xi.size() == g.boundary_face_count());
    for (std::size_t b = 0; b < xi.xi.size(); ++b) {
      CHECK(xi.xi[b] == Approx(0.5 - 2.0 * g.boundary_faces()[b].center[0]));
    }
    XiSpec wave;
    wave.kind = XiKind::Sinusoidal;
    wave.axis = 1;
    wave.amplitude = 0.3;
    wave.wavenumber = 2.0;
    const auto s = sample_xi(g, wave);
    for (std::size_t b = 0; b < s.xi.size(); ++b) {
      CHECK(s.xi[b] == Approx(0.3 * std::sin(2.0 * M_PI * 2.0 * g.boundary_faces()[b].center[1])));
    }

    const auto dir = scratch("xi");
    const auto path = (dir / "xi.txt").string();
    {
      std::ofstream out(path);
      for (std::size_t b = 0; b < g.boundary_face_count(); ++b) out << 0.1 * b << (b % 3 ? " " : "\n");
    }
    XiSpec table;
    table.kind = XiKind::Table;
    table.path = path;
    const auto t = sample_xi(g, table);
    for (std::size_t b = 0; b < t.xi.size(); ++b) CHECK(t.xi[b] == Approx(0.1 * b));
    std::ofstream(path) << "1 2 3\n";
    CHECK_THROWS_AS(sample_xi(g, table), ConfigError);
    fs::remove_all(dir);
  }

  TEST_CASE("initial profiles") {
    const Grid g = test::square(8);
    const auto flat = make_profile(g, ProfileSpec{ProfileKind::Uniform, 0.7}, 0);
    for (double v : flat.interior()) CHECK(v == 0.7);
    ProfileSpec board{ProfileKind::Checkerboard, 1.0, 0.5};
    const auto cb = make_profile(g, board, 0);
    CHECK(cb[g.index(0, 0)] == 1.5);
    CHECK(cb[g.index(1, 0)] == 0.5);
    CHECK(integrate_cells(cb) == Approx(1.0));
    ProfileSpec cosine{ProfileKind::Cosine, 1.0, 0.3};
    CHECK(integrate_cells(make_profile(g, cosine, 0)) == Approx(1.0).epsilon(1e-14));
    ProfileSpec noise{ProfileKind::Random, 1.0, 0.2};
    const auto r1 = make_profile(g, noise, 5);
    const auto r2 = make_profile(g, noise, 5);
    const auto r3 = make_profile(g, noise, 6);
    CHECK(test::max_abs_diff(r1.interior(), r2.interior()) == 0.0);
    CHECK(test::max_abs_diff(r1.interior(), r3.interior()) > 0.0);
    for (double v : r1.interior()) CHECK(std::abs(v - 1.0) <= 0.2);
  }

  TEST_CASE("scenario library") {
    const auto names = scenario_names();
    CHECK(names.size() == 4);

    const auto relax = scenario("two_species_relaxation");
    REQUIRE(relax.species.size() == 2);
    CHECK(relax.params.fluid_model == FluidModel::NPS);
    CHECK(relax.xi.kind == XiKind::Constant);
    CHECK(relax.xi.value == 0.0);
    for (const auto& s : relax.species) {
      CHECK(s.bc == SpeciesBc::Blocking);
      CHECK(s.initial.kind == ProfileKind::Gaussian);
    }
    CHECK(relax.species[0].valence == 1.0);
    CHECK(relax.species[1].valence == -1.0);

    const auto m3 = scenario("equal_diffusivity_m3");
    REQUIRE(m3.species.size() == 3);
    CHECK(m3.run.rho_sigma_shadow);
    for (const auto& s : m3.species) CHECK(s.diffusivity == m3.species[0].diffusivity);

    const auto mixed = scenario("mixed_small_anion");
    const Grid g = mixed.grid.make();
    const double c1 = integrate_cells(make_profile(g, mixed.species[0].initial, 0));
    const double c2 = integrate_cells(make_profile(g, mixed.species[1].initial, 0));
    CHECK(c2 / c1 == Approx(1e-3).epsilon(1e-12));
    CHECK(mixed.species[0].bc == SpeciesBc::Dirichlet);
    CHECK(mixed.species[1].bc == SpeciesBc::Blocking);

    const auto volt = scenario("applied_voltage");
    const auto xi = sample_xi(volt.grid.make(), volt.xi);
    const auto [lo, hi] = std::minmax_element(xi.xi.begin(), xi.xi.end());
    CHECK(*hi - *lo > 1.5);

    const auto [msg, key] = config_error([] { scenario("no_such_scenario"); });
    for (const auto& n : names) CHECK(msg.find(n) != std::string::npos);
  }
}
