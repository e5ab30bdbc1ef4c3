#include <doctest.h>

#include <cmath>

#include "npsim/diagnostics.hpp"
#include "npsim/errors.hpp"
#include "npsim/fluid.hpp"
#include "npsim/nernst_planck.hpp"
#include "npsim/poisson.hpp"
#include "npsim/verification.hpp"
#include "support.hpp"

using namespace npsim;
using doctest::Approx;

namespace {

struct Setup {
  SimState state;
  std::vector<double> xi;
};

Setup random_setup(const Grid& g, std::span<const SpeciesSpec> species, const PhysicalParams& params,
                   std::uint64_t seed) {
  Setup s{SimState(g, species.size()), test::random_values(g.boundary_face_count(), seed, -1.0, 1.0)};
  for (std::size_t i = 0; i < species.size(); ++i) {
    test::randomize(s.state.concentrations[i].interior(), seed + 1 + i, 0.05, 2.0);
  }
  s.state.concentrations[0][0] = 0.0;
  const auto rho = charge_density(s.state, species);
  s.state.potential = test::solved_potential(g, rho.interior(), s.xi, params.epsilon, params.tau);
  s.state.velocity = random_solenoidal(g, seed + 50, 0.8);
  return s;
}

double population_variance(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= v.size();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / v.size();
}

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("Lyapunov functional of simple states") {
    const Grid g = test::square(8);
    PhysicalParams params;
    SimState neutral(g, 2);
    neutral.concentrations[0] = ScalarField(g, 1.0);
    neutral.concentrations[1] = ScalarField(g, 1.0);
    const std::vector<double> zero(g.boundary_face_count(), 0.0);
    neutral.potential = test::solved_potential(g, charge_density(neutral, test::ion_pair()).interior(), zero);
    for (double v : neutral.potential.interior()) CHECK(v == 0.0);
    CHECK(lyapunov(neutral, test::ion_pair(), params) == 0.0);

    const Grid box(2, {6, 4, 1}, {1.5, 2.0, 1.0});
    const std::vector<SpeciesSpec> inert{SpeciesSpec{"n", 0.0, 1.0, SpeciesBc::Blocking, 0.0, {}}};
    SimState single(box, 1);
    single.concentrations[0] = ScalarField(box, std::exp(1.0));
    single.potential = test::solved_potential(box, std::vector<double>(box.cell_count(), 0.0),
                                              std::vector<double>(box.boundary_face_count(), 0.0));
    CHECK(lyapunov(single, inert, params) == Approx(3.0 * std::exp(1.0)).epsilon(1e-14));

    single.concentrations[0].fill(0.0);
    CHECK(lyapunov(single, inert, params) == 0.0);
  }

  TEST_CASE("Lyapunov functional matches the independent oracle") {
    const Grid g(2, {20, 12, 1}, {1.0, 0.6, 1.0});
    PhysicalParams params{0.3, 2.0, 0.5, 0.8, FluidModel::NPS};
    auto species = test::ion_pair(1.0, 0.5);
    species.push_back(SpeciesSpec{"dication", 2.0, 0.2, SpeciesBc::Blocking, 0.0, {}});
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto s = random_setup(g, species, params, 10 * seed);
      const double v = lyapunov(s.state, species, params);
      const double ref = lyapunov_oracle(s.state, species, params, s.xi);
      CHECK(v == Approx(ref).epsilon(1e-12));
      const auto parts = lyapunov_parts(s.state, species, params);
      CHECK(parts.total() == Approx(v).epsilon(1e-15));
      CHECK(parts.kinetic == Approx(velocity_gradient_norms(s.state.velocity).l2_sq / (2.0 * params.K)));
      CHECK(parts.field >= 0.0);
      CHECK(parts.boundary >= 0.0);
    }
  }

  TEST_CASE("dissipation face concentration") {
    CHECK(logarithmic_mean(2.0, 2.0) == 2.0);
    CHECK(logarithmic_mean(1.0, std::exp(2.0)) == Approx((std::exp(2.0) - 1.0) / 2.0).epsilon(1e-15));
    CHECK(logarithmic_mean(0.0, 3.0) == 0.0);
    CHECK(dissipation_face_concentration(1.0, std::exp(2.0), 0.0) == Approx((std::exp(2.0) - 1.0) / 2.0));
    // D c_face (mu_P - mu_E) / h reproduces the SG flux.
    for (double delta : {-3.0, -0.2, 1e-6, 0.7, 4.0}) {
      for (auto [cp, ce] : {std::pair{0.3, 1.9}, std::pair{2.0, 0.01}, std::pair{1.0, 1.1}}) {
        const double dmu = std::log(ce) - std::log(cp) + delta;
        const double cf = dissipation_face_concentration(cp, ce, delta);
        CHECK(cf > 0.0);
        CHECK(-0.4 * cf * dmu / 0.1 == Approx(electro_diffusive_face_flux(cp, ce, delta, 1.0, 0.4, 0.1)).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("dissipation") {
    const std::vector<SpeciesSpec> inert{SpeciesSpec{"n", 0.0, 1.0, SpeciesBc::Blocking, 0.0, {}}};
    const Grid pair(2, {2, 2, 1}, {2.0, 2.0, 1.0});
    SimState s(pair, 1);
    s.concentrations[0][pair.index(0, 0)] = 1.0;
    s.concentrations[0][pair.index(1, 0)] = std::exp(2.0);
    s.concentrations[0][pair.index(0, 1)] = 1.0;
    s.concentrations[0][pair.index(1, 1)] = std::exp(2.0);
    s.potential = ScalarField(pair, 0.0);
    fill_neumann_ghosts(s.potential);
    const double face = (std::exp(2.0) - 1.0) / 2.0;
    CHECK(dissipation(s, inert) == Approx(2.0 * face * 4.0).epsilon(1e-14));

    s.concentrations[0].fill(1.3);
    CHECK(dissipation(s, inert) == 0.0);

    s.concentrations[0][0] = 0.0;
    CHECK(dissipation(s, inert) == 0.0);

    const Grid g = test::square(10);
    const auto species = test::ion_pair(1.0, 2.0);
    PhysicalParams params;
    auto eq = random_setup(g, species, params, 3);
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t c = 0; c < g.cell_count(); ++c) {
        eq.state.concentrations[i][c] = 0.5 * std::exp(-species[i].valence * eq.state.potential[c]);
      }
    }
    CHECK(dissipation(eq.state, species) <= 1e-24);
    const auto rnd = random_setup(g, species, params, 4);
    CHECK(dissipation(rnd.state, species) > 0.0);
  }

  TEST_CASE("mu variance") {
    const Grid g = test::square(8);
    const auto species = test::ion_pair();
    PhysicalParams params;
    auto s = random_setup(g, species, params, 7);
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t c = 0; c < g.cell_count(); ++c) {
        s.state.concentrations[i][c] = std::exp(-species[i].valence * s.state.potential[c]);
      }
    }
    auto eq = mu_variance(s.state, species);
    CHECK_FALSE(eq.flagged);
    for (double v : eq.variance) CHECK(v <= 1e-28);

    std::vector<SpeciesSpec> dication{SpeciesSpec{"d", 2.0, 1.0, SpeciesBc::Blocking, 0.0, {}}};
    SimState uniform(g, 1);
    uniform.concentrations[0] = ScalarField(g, 0.4);
    uniform.potential = s.state.potential;
    const auto mv = mu_variance(uniform, dication);
    CHECK(mv.variance[0] == Approx(4.0 * population_variance(s.state.potential.interior())).epsilon(1e-12));

    uniform.concentrations[0][5] = 0.0;
    CHECK(mu_variance(uniform, dication).flagged);
    uniform.concentrations[0].fill(0.0);
    const auto empty = mu_variance(uniform, dication);
    CHECK(empty.flagged);
    CHECK(std::isnan(empty.variance[0]));
  }

  TEST_CASE("cancellation quantity is nonnegative for a pair") {
    const Grid g = test::square(6);
    const auto species = test::ion_pair();
    PhysicalParams params;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto s = random_setup(g, species, params, seed);
      const double q = cancellation_quantity(s.state, species);
      CHECK(q >= -1e-12);
      CHECK(q == Approx(cancellation_quantity_squared_form(s.state, species)).epsilon(1e-12));
    }
  }

  TEST_CASE("mixed boundary monitors") {
    const Grid g = test::square(6);
    std::vector<SpeciesSpec> species{SpeciesSpec{"cation", 1.0, 1.0, SpeciesBc::Dirichlet, 1.5, {}},
                                     SpeciesSpec{"anion", -1.0, 1.0, SpeciesBc::Blocking, 0.0, {}}};
    CHECK(MixedBcMonitor::applies(species));
    CHECK_FALSE(MixedBcMonitor::applies(test::ion_pair()));
    CHECK_THROWS_AS(MixedBcMonitor{test::ion_pair()}, ConfigError);

    MixedBcMonitor monitor(species);
    SimState s(g, 2);
    s.concentrations[0] = ScalarField(g, 1.5);
    s.concentrations[1] = ScalarField(g, 1.5);
    auto m = monitor.sample(s, species);
    CHECK(m.q1_l2 == 0.0);
    CHECK(m.c2_l1 == Approx(1.5));
    for (int n = 0; n < 10; ++n) monitor.accumulate(s, species, 0.1);
    CHECK(monitor.rho_sq_integral() == 0.0);

    s.concentrations[1].fill(0.5);
    monitor.accumulate(s, species, 0.25);
    CHECK(monitor.rho_sq_integral() == Approx(0.25 * 1.0));
    CHECK(monitor.sample(s, species).rho_sq_integral == monitor.rho_sq_integral());
  }

  TEST_CASE("budget residual bookkeeping") {
    PhysicalParams params{1.0, 2.0, 0.6, 1.0, FluidModel::NPS};
    CHECK(energy_budget_residual(2.0, 1.9, 0.7, 0.5, 0.1, params) == Approx(-1.0 + 0.7 + 0.3 * 0.5));
    DiagnosticsRecord a, b;
    a.step = 4;
    a.V = 2.0;
    a.dissipation = 0.7;
    a.grad_u_sq = 0.5;
    b.step = 5;
    b.V = 1.9;
    CHECK(*energy_budget_residual(a, b, 0.1, params) == Approx(-1.0 + 0.7 + 0.15));
    b.step = 6;
    CHECK_FALSE(energy_budget_residual(a, b, 0.1, params).has_value());

    CHECK(lyapunov_tolerance(0.01, 0.1, 0.5, -3.0, 2.0) == Approx(kBudgetConstant * 0.02 * 0.5 * 4.0));
  }

  TEST_CASE("monotonicity and boundedness checks") {
    std::vector<DiagnosticsRecord> recs(5);
    for (std::size_t i = 0; i < recs.size(); ++i) {
      recs[i].step = i;
      recs[i].t = 0.1 * i;
      recs[i].V = 1.0 - 0.1 * i;
    }
    auto ok = check_lyapunov_monotone(recs, 0.1, 0.1);
    CHECK(ok.ok);
    CHECK(ok.pairs == 4);
    recs[3].V = 1.0;
    auto bad = check_lyapunov_monotone(recs, 0.1, 0.1);
    CHECK_FALSE(bad.ok);
    CHECK(bad.worst_index == 3);
    CHECK(bad.worst_excess > 0.0);

    const std::vector<double> t{0, 1, 2, 3, 4, 5};
    CHECK(check_bounded(t, std::vector<double>{3, 2, 2.5, 1, 1, 1}, 0.0).ok);
    const auto grow = check_bounded(t, std::vector<double>{1, 1, 1, 1, 1.5, 1}, 0.1);
    CHECK_FALSE(grow.ok);
    CHECK(grow.second_half_max == 1.5);
  }

  TEST_CASE("record contents") {
    const Grid g = test::square(8);
    const auto species = test::ion_pair();
    PhysicalParams params;
    auto s = random_setup(g, species, params, 9);
    const auto rec = compute_record(s.state, species, params, 0.25);
    REQUIRE(rec.mass.size() == 2);
    CHECK(rec.mass[1] == Approx(integrate_cells(s.state.concentrations[1])));
    CHECK(rec.linf[0] == *std::max_element(s.state.concentrations[0].interior().begin(),
                                           s.state.concentrations[0].interior().end()));
    CHECK(rec.V == Approx(lyapunov(s.state, species, params)));
    CHECK(rec.dissipation == Approx(dissipation(s.state, species)));
    CHECK(rec.U_T == 0.25);
    CHECK(rec.grad_u_sq == Approx(velocity_gradient_norms(s.state.velocity).grad_sq));
    CHECK(rec.Q == Approx(cancellation_quantity(s.state, species)));
    CHECK(rec.mu_var_flag);
    CHECK_FALSE(rec.budget_residual.has_value());
    CHECK(rec.phi_h1 > 0.0);
  }
}
