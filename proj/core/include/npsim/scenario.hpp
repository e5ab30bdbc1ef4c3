#pragma once

#include <string>
#include <vector>

#include "npsim/config.hpp"

namespace npsim {

/// Built-in configurations:
///   two_species_relaxation  z = (1,-1), blocking walls, xi = 0, NPS, two
///                           Gaussian blobs of equal mass
///   equal_diffusivity_m3    z = (1,1,-1), equal D, (rho, sigma) shadow run
///   mixed_small_anion       cation selective (gamma = 1), anion blocking with
///                           ||c2||_1 = 1e-3 ||c1||_1
///   applied_voltage         xi linear in x with a drop of 2
SimConfig scenario(const std::string& name);
std::vector<std::string> scenario_names();

}  // namespace npsim
