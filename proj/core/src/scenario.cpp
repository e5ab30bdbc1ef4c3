#include "npsim/scenario.hpp"

#include "npsim/errors.hpp"

namespace npsim {
namespace {

SimConfig base(int n, double t_end) {
  SimConfig c;
  c.grid.dim = 2;
  c.grid.cells = {n, n, 1};
  c.grid.lengths = {1.0, 1.0, 1.0};
  c.params.epsilon = 0.1;
  c.params.K = 1.0;
  c.params.nu = 1.0;
  c.params.tau = 1.0;
  c.params.fluid_model = FluidModel::NPS;
  c.run.t_end = t_end;
  c.run.sample_every = 10;
  return c;
}

ProfileSpec gaussian(double x, double y, double amplitude, double width) {
  ProfileSpec p;
  p.kind = ProfileKind::Gaussian;
  p.base = 1.0;
  p.amplitude = amplitude;
  p.center = {x, y, 0.5};
  p.width = width;
  return p;
}

SimConfig two_species_relaxation() {
  SimConfig c = base(32, 3.0);
  // The blobs are point reflections of each other, so the discrete masses
  // agree and the rest state is uniform with Phi = 0.
  c.species.push_back({"cation", 1.0, 1.0, SpeciesBc::Blocking, 0.0, gaussian(0.3, 0.4, 0.5, 0.1)});
  c.species.push_back({"anion", -1.0, 0.5, SpeciesBc::Blocking, 0.0, gaussian(0.7, 0.6, 0.5, 0.1)});
  c.output.directory = "out/two_species_relaxation";
  return c;
}

SimConfig equal_diffusivity_m3() {
  SimConfig c = base(16, 0.5);
  c.species.push_back({"cation_a", 1.0, 1.0, SpeciesBc::Blocking, 0.0, gaussian(0.3, 0.3, 0.5, 0.12)});
  ProfileSpec cos;
  cos.kind = ProfileKind::Cosine;
  cos.base = 0.5;
  cos.amplitude = 0.25;
  cos.modes = {1, 2, 1};
  c.species.push_back({"cation_b", 1.0, 1.0, SpeciesBc::Blocking, 0.0, cos});
  c.species.push_back({"anion", -1.0, 1.0, SpeciesBc::Blocking, 0.0, gaussian(0.6, 0.7, 0.4, 0.15)});
  c.species.back().initial.base = 1.5;
  c.run.rho_sigma_shadow = true;
  c.output.directory = "out/equal_diffusivity_m3";
  return c;
}

SimConfig mixed_small_anion() {
  SimConfig c = base(32, 1.0);
  ProfileSpec one;
  one.kind = ProfileKind::Uniform;
  one.base = 1.0;
  c.species.push_back({"cation", 1.0, 1.0, SpeciesBc::Dirichlet, 1.0, one});
  // The cosine mode has zero cell average, so ||c2||_1 = 1e-3 exactly.
  ProfileSpec small;
  small.kind = ProfileKind::Cosine;
  small.base = 1e-3;
  small.amplitude = 5e-4;
  c.species.push_back({"anion", -1.0, 1.0, SpeciesBc::Blocking, 0.0, small});
  c.output.directory = "out/mixed_small_anion";
  return c;
}

SimConfig applied_voltage() {
  SimConfig c = base(32, 1.0);
  ProfileSpec one;
  one.kind = ProfileKind::Uniform;
  one.base = 1.0;
  c.species.push_back({"cation", 1.0, 1.0, SpeciesBc::Blocking, 0.0, one});
  c.species.push_back({"anion", -1.0, 1.0, SpeciesBc::Blocking, 0.0, one});
  c.xi.kind = XiKind::Linear;
  c.xi.axis = 0;
  c.xi.value = -1.0;
  c.xi.slope = 2.0;
  c.output.directory = "out/applied_voltage";
  return c;
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"two_species_relaxation", "equal_diffusivity_m3", "mixed_small_anion", "applied_voltage"};
}

SimConfig scenario(const std::string& name) {
  if (name == "two_species_relaxation") return two_species_relaxation();
  if (name == "equal_diffusivity_m3") return equal_diffusivity_m3();
  if (name == "mixed_small_anion") return mixed_small_anion();
  if (name == "applied_voltage") return applied_voltage();
  std::string list;
  for (const auto& n : scenario_names()) list += (list.empty() ? "" : ", ") + n;
  throw ConfigError("unknown scenario '" + name + "'; available: " + list, "scenario");
}

}  // namespace npsim
