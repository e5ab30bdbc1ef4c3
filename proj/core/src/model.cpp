#include "npsim/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "npsim/errors.hpp"

namespace npsim {

const char* to_string(SpeciesBc bc) noexcept {
  return bc == SpeciesBc::Blocking ? "blocking" : "dirichlet";
}

const char* to_string(FluidModel m) noexcept {
  switch (m) {
    case FluidModel::NPNS: return "NPNS";
    case FluidModel::NPS: return "NPS";
    case FluidModel::Frozen: return "Frozen";
  }
  return "?";
}

const char* to_string(ProfileKind k) noexcept {
  switch (k) {
    case ProfileKind::Uniform: return "uniform";
    case ProfileKind::Gaussian: return "gaussian";
    case ProfileKind::Cosine: return "cosine";
    case ProfileKind::Checkerboard: return "checkerboard";
    case ProfileKind::Random: return "random";
  }
  return "?";
}

const char* to_string(XiKind k) noexcept {
  switch (k) {
    case XiKind::Constant: return "constant";
    case XiKind::Linear: return "linear";
    case XiKind::Sinusoidal: return "sinusoidal";
    case XiKind::Table: return "table";
  }
  return "?";
}

void validate(const SpeciesSpec& s) {
  if (!(s.diffusivity > 0.0) || !std::isfinite(s.diffusivity)) {
    throw ConfigError("species '" + s.name + "': diffusivity must be positive", "species.diffusivity");
  }
  if (!std::isfinite(s.valence)) {
    throw ConfigError("species '" + s.name + "': valence must be finite", "species.valence");
  }
  if (s.bc == SpeciesBc::Dirichlet && !(s.gamma > 0.0)) {
    throw ConfigError("species '" + s.name +
                          "': selective wall concentration gamma must be > 0 (a membrane holds a "
                          "strictly positive ion level)",
                      "species.gamma");
  }
}

void validate(const PhysicalParams& p) {
  auto positive = [](double v, const char* key, const char* why) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string(key) + " must be > 0: " + why, std::string("params.") + key);
    }
  };
  positive(p.epsilon, "epsilon", "the rescaled permittivity is strictly positive");
  positive(p.K, "K", "the coupling constant k_B T is strictly positive");
  positive(p.nu, "nu", "the viscosity is strictly positive");
  positive(p.tau, "tau",
           "the Robin closure dn(Phi) + tau*Phi = xi needs a positive double-layer capacitance "
           "(tau <= 0 loses uniqueness of the potential)");
}

BoundaryData sample_xi(const Grid& grid, const XiSpec& spec) {
  BoundaryData data;
  const auto faces = grid.boundary_faces();
  data.xi.resize(faces.size());
  if (spec.kind == XiKind::Table) {
    std::ifstream in(spec.path);
    if (!in) throw ConfigError("cannot read xi table '" + spec.path + "'", "boundary.xi.path");
    for (std::size_t b = 0; b < faces.size(); ++b) {
      if (!(in >> data.xi[b])) {
        throw ConfigError("xi table '" + spec.path + "' has fewer than " +
                              std::to_string(faces.size()) + " values",
                          "boundary.xi.path");
      }
    }
    double extra = 0.0;
    if (in >> extra) {
      throw ConfigError("xi table '" + spec.path + "' has more values than boundary faces",
                        "boundary.xi.path");
    }
  } else {
    if (spec.axis < 0 || spec.axis >= grid.dim()) {
      throw ConfigError("xi axis out of range", "boundary.xi.axis");
    }
    for (std::size_t b = 0; b < faces.size(); ++b) {
      const double x = faces[b].center[spec.axis];
      switch (spec.kind) {
        case XiKind::Constant: data.xi[b] = spec.value; break;
        case XiKind::Linear: data.xi[b] = spec.value + spec.slope * x; break;
        case XiKind::Sinusoidal:
          data.xi[b] = spec.value + spec.amplitude * std::sin(2.0 * std::numbers::pi * spec.wavenumber * x /
                                                              grid.length(spec.axis));
          break;
        case XiKind::Table: break;
      }
    }
  }
  for (double v : data.xi) {
    if (!std::isfinite(v)) throw ConfigError("xi must be finite on every boundary face", "boundary.xi");
  }
  return data;
}

ScalarField make_profile(const Grid& grid, const ProfileSpec& spec, std::uint64_t seed) {
  ScalarField f(grid);
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const auto x = grid.cell_center(c);
    const auto ijk = grid.coords(c);
    double v = spec.base;
    switch (spec.kind) {
      case ProfileKind::Uniform: break;
      case ProfileKind::Gaussian: {
        double r2 = 0.0;
        for (int a = 0; a < grid.dim(); ++a) r2 += (x[a] - spec.center[a]) * (x[a] - spec.center[a]);
        v += spec.amplitude * std::exp(-r2 / (2.0 * spec.width * spec.width));
        break;
      }
      case ProfileKind::Cosine: {
        double p = 1.0;
        for (int a = 0; a < grid.dim(); ++a) {
          p *= std::cos(spec.modes[a] * std::numbers::pi * x[a] / grid.length(a));
        }
        v += spec.amplitude * p;
        break;
      }
      case ProfileKind::Checkerboard:
        v += ((ijk[0] + ijk[1] + ijk[2]) % 2 == 0 ? 1.0 : -1.0) * spec.amplitude;
        break;
      case ProfileKind::Random: {
        // 53 random bits -> [0,1); the standard distributions are not portable.
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        v += spec.amplitude * (2.0 * u - 1.0);
        break;
      }
    }
    f[c] = v;
  }
  return f;
}

SimState::SimState(const Grid& grid, std::size_t species_count)
    : concentrations(species_count, ScalarField(grid)),
      potential(grid),
      velocity(grid),
      pressure(grid) {}

double SimState::min_concentration() const noexcept {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : concentrations) {
    for (double v : c.interior()) m = std::min(m, v);
  }
  return m;
}

}  // namespace npsim
