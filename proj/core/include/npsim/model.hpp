#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "npsim/fields.hpp"
#include "npsim/grid.hpp"

namespace npsim {

enum class SpeciesBc { Blocking, Dirichlet };
enum class FluidModel { NPNS, NPS, Frozen };

const char* to_string(SpeciesBc bc) noexcept;
const char* to_string(FluidModel m) noexcept;

enum class ProfileKind { Uniform, Gaussian, Cosine, Checkerboard, Random };

const char* to_string(ProfileKind k) noexcept;

/// Initial concentration generator.
///   uniform:      base
///   gaussian:     base + amplitude * exp(-|x - center|^2 / (2 width^2))
///   cosine:       base + amplitude * prod_a cos(modes_a * pi * x_a / L_a)
///   checkerboard: base + amplitude * (-1)^(i+j+k)
///   random:       base + amplitude * U(-1,1), seeded
struct ProfileSpec {
  ProfileKind kind = ProfileKind::Uniform;
  double base = 1.0;
  double amplitude = 0.0;
  std::array<double, 3> center{0.5, 0.5, 0.5};
  double width = 0.1;
  std::array<int, 3> modes{1, 1, 1};
};

struct SpeciesSpec {
  std::string name;
  double valence = 0.0;
  double diffusivity = 1.0;
  SpeciesBc bc = SpeciesBc::Blocking;
  /// Wall concentration for selective (Dirichlet) walls; must be > 0.
  double gamma = 0.0;
  ProfileSpec initial;
};

/// Throws ConfigError unless D > 0 and (for Dirichlet) gamma > 0.
void validate(const SpeciesSpec& s);

struct PhysicalParams {
  double epsilon = 1.0;
  double K = 1.0;
  double nu = 1.0;
  double tau = 1.0;
  FluidModel fluid_model = FluidModel::NPS;
};

void validate(const PhysicalParams& p);

/// Applied potential xi sampled at boundary face centres.
struct BoundaryData {
  std::vector<double> xi;
};

enum class XiKind { Constant, Linear, Sinusoidal, Table };

/// xi generators:
///   constant:   value
///   linear:     value + slope * x_axis
///   sinusoidal: value + amplitude * sin(2 pi wavenumber x_axis / L_axis)
///   table:      one value per boundary face, whitespace separated, read from path
struct XiSpec {
  XiKind kind = XiKind::Constant;
  double value = 0.0;
  int axis = 0;
  double slope = 0.0;
  double amplitude = 0.0;
  double wavenumber = 1.0;
  std::string path;
};

const char* to_string(XiKind k) noexcept;

BoundaryData sample_xi(const Grid& grid, const XiSpec& spec);
ScalarField make_profile(const Grid& grid, const ProfileSpec& spec, std::uint64_t seed);

/// Every evolving field plus the clock.
struct SimState {
  explicit SimState(const Grid& grid, std::size_t species_count = 0);

  std::vector<ScalarField> concentrations;
  ScalarField potential;
  StaggeredVectorField velocity;
  ScalarField pressure;
  double t = 0.0;
  std::uint64_t step = 0;

  const Grid& grid() const noexcept { return potential.grid(); }
  double min_concentration() const noexcept;
};

}  // namespace npsim
