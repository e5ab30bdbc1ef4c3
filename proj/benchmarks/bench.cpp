#include <benchmark/benchmark.h>

#include <cmath>

#include "npsim/fluid.hpp"
#include "npsim/nernst_planck.hpp"
#include "npsim/poisson.hpp"
#include "npsim/scenario.hpp"
#include "npsim/simulation.hpp"

namespace {

using namespace npsim;

Grid square(int n) { return Grid(2, {n, n, 1}, {1.0, 1.0, 1.0}); }

std::vector<double> bump(const Grid& g) {
  std::vector<double> rho(g.cell_count());
  for (std::size_t c = 0; c < rho.size(); ++c) {
    const auto x = g.cell_center(c);
    rho[c] = std::exp(-40.0 * ((x[0] - 0.4) * (x[0] - 0.4) + (x[1] - 0.6) * (x[1] - 0.6))) - 0.1;
  }
  return rho;
}

void BM_PoissonSolve(benchmark::State& st) {
  const Grid g = square(static_cast<int>(st.range(0)));
  const auto pre = st.range(1) ? Preconditioner::Separable : Preconditioner::Jacobi;
  RobinPoissonSolver solver(g, 0.1, 1.0, pre, {100000, 1e-10});
  const auto rho = bump(g);
  const std::vector<double> xi(g.boundary_face_count(), 0.2);
  int iterations = 0;
  for (auto _ : st) {
    ScalarField phi(g);
    iterations = solver.solve(rho, xi, phi).iterations;
    benchmark::DoNotOptimize(phi.raw().data());
  }
  st.counters["cg_iterations"] = iterations;
}
BENCHMARK(BM_PoissonSolve)->ArgsProduct({{32, 64, 128}, {0, 1}})->Unit(benchmark::kMicrosecond);

void BM_ConcentrationStep(benchmark::State& st) {
  const Grid g = square(static_cast<int>(st.range(0)));
  std::vector<SpeciesSpec> species{{"cation", 1.0, 1.0, SpeciesBc::Blocking, 0.0, {}},
                                   {"anion", -1.0, 0.5, SpeciesBc::Blocking, 0.0, {}}};
  SimState s(g, 2);
  const auto rho = bump(g);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    s.concentrations[0][c] = 1.0 + 0.5 * rho[c];
    s.concentrations[1][c] = 1.0 - 0.5 * rho[c];
  }
  RobinPoissonSolver(g, 0.1, 1.0, Preconditioner::Separable)
      .solve(rho, std::vector<double>(g.boundary_face_count(), 0.0), s.potential);
  const double dt = 1e-3 * stable_concentration_dt(species, s.potential, s.velocity);
  for (auto _ : st) advance_concentrations(s, species, dt);
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(g.cell_count()));
}
BENCHMARK(BM_ConcentrationStep)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_StokesStep(benchmark::State& st) {
  const Grid g = square(static_cast<int>(st.range(0)));
  PhysicalParams params;
  FluidSolver solver(g, params);
  StaggeredVectorField u(g);
  StaggeredVectorField force(g);
  for (std::size_t i = 0; i < force.component(0).size(); ++i) force.component(0)[i] = std::sin(0.37 * i);
  ScalarField p(g);
  const double dt = solver.stable_dt(u);
  for (auto _ : st) {
    StaggeredVectorField v = u;
    solver.step(v, p, force, dt);
    benchmark::DoNotOptimize(v.component(0).data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(g.cell_count()));
}
BENCHMARK(BM_StokesStep)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_SimulationStep(benchmark::State& st) {
  auto c = scenario("two_species_relaxation");
  c.grid.cells = {static_cast<int>(st.range(0)), static_cast<int>(st.range(0)), 1};
  c.run.t_end = 1e9;
  Simulation sim(c);
  for (auto _ : st) benchmark::DoNotOptimize(sim.step().V);
}
BENCHMARK(BM_SimulationStep)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
