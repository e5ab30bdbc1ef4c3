#include <doctest.h>

#include <cmath>

#include "npsim/errors.hpp"
#include "npsim/scenario.hpp"
#include "npsim/verification.hpp"
#include "support.hpp"

using namespace npsim;
using doctest::Approx;

TEST_SUITE("verification_oracle") {
  TEST_CASE("manufactured solutions converge at the expected order") {
    const auto poisson = mms_convergence("poisson_robin");
    REQUIRE(poisson.size() == 1);
    CHECK(poisson[0].passed);
    CHECK(poisson[0].fitted_order >= 1.9);
    CHECK(poisson[0].levels.size() >= 3);

    const auto diffusion = mms_convergence("diffusion_blocking");
    REQUIRE(diffusion.size() == 2);
    CHECK(diffusion[0].parameter == "h");
    CHECK(diffusion[0].fitted_order >= 1.9);
    CHECK(diffusion[1].parameter == "dt");
    CHECK(diffusion[1].fitted_order >= 0.9);

    const auto advection = mms_convergence("advection_diffusion_frozen_u");
    REQUIRE(advection.size() == 1);
    CHECK(advection[0].fitted_order >= 0.9);
    for (const auto& r : advection) {
      for (std::size_t k = 1; k < r.errors.size(); ++k) CHECK(r.errors[k] < r.errors[k - 1]);
    }
    CHECK(format_report(advection[0]).find("advection_diffusion_frozen_u") != std::string::npos);
    CHECK_THROWS_AS(mms_convergence("heat"), ConfigError);
  }

  TEST_CASE("trace ratios") {
    const int levels[] = {16, 32, 64};
    const auto one = trace_inequality_check(levels, TraceFamily::Constant, 2.0);
    for (double r : one.max_ratio) CHECK(r == Approx(2.0).epsilon(1e-12));
    const auto zero = trace_inequality_check(levels, TraceFamily::Zero, 3.0);
    for (double r : zero.max_ratio) CHECK(r == 0.0);
    for (double p : {2.0, 3.0, 4.0}) {
      const auto peaked = trace_inequality_check(levels, TraceFamily::BoundaryPeaked, p);
      CHECK(peaked.passed);
      CHECK(peaked.variation < 0.2);
      const auto fourier = trace_inequality_check(levels, TraceFamily::RandomFourier, p, 3);
      CHECK(fourier.variation < 0.2);
      CHECK(fourier.samples.size() == trace_inequality_check(levels, TraceFamily::RandomFourier, p, 3).samples.size());
    }
    CHECK_THROWS_AS(trace_inequality_check(levels, TraceFamily::Constant, 1.5), ConfigError);
    CHECK_THROWS_AS(trace_inequality_check(levels, TraceFamily::Constant, 4.5), ConfigError);
  }

  TEST_CASE("random solenoidal fields") {
    const Grid g(2, {11, 7, 1}, {1.0, 0.7, 1.0});
    const auto u = random_solenoidal(g, 4);
    CHECK(u.max_abs_divergence() <= 1e-12);
    CHECK(u.max_boundary_normal() == 0.0);
    const auto v = random_solenoidal(g, 4);
    CHECK(test::max_abs_diff(u.component(0), v.component(0)) == 0.0);
    CHECK_THROWS_AS(random_solenoidal(Grid(3, {3, 3, 3}, {1.0, 1.0, 1.0}), 1), ConfigError);
  }

  TEST_CASE("rho-sigma equivalence") {
    auto m3 = scenario("equal_diffusivity_m3");
    m3.grid.cells = {16, 16, 1};
    const auto r = rho_sigma_equivalence(m3, 100);
    CHECK(r.steps == 100);
    CHECK(r.max_deviation <= 1e-10);
    CHECK_THROWS_AS(rho_sigma_equivalence(scenario("mixed_small_anion"), 10), ConfigError);
  }

  TEST_CASE("budget residual halves with dt") {
    auto c = scenario("two_species_relaxation");
    c.grid.cells = {16, 16, 1};
    const auto study = budget_refinement_study(c, 4e-4, 0.02, 3);
    REQUIRE(study.ratios.size() == 2);
    for (double r : study.ratios) {
      CHECK(r >= 0.3);
      CHECK(r <= 0.7);
    }
    CHECK(study.passed);

    for (auto& s : c.species) s.initial = ProfileSpec{ProfileKind::Uniform, 1.0};
    const auto rest = budget_refinement_study(c, 4e-4, 0.004, 2);
    for (const auto& l : rest.levels) CHECK(l.max_abs_residual <= 1e-10);
  }

  TEST_CASE("suites") {
    const auto names = suite_names();
    CHECK(names.size() == 6);
    for (const auto& n : {"fluid", "energy", "trace", "rho-sigma"}) {
      const auto r = run_suite(n);
      CHECK_MESSAGE(r.passed(), format_suite(r));
      CHECK(r.checks.size() >= 3);
      CHECK(suite_record(r).find("\"record\":\"verify\"") != std::string::npos);
    }
    CHECK_THROWS_AS(run_suite("nonsense"), ConfigError);
  }
}
