#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "npsim/grid.hpp"
#include "npsim/model.hpp"

namespace npsim {

struct GridConfig {
  int dim = 2;
  std::array<int, 3> cells{0, 0, 1};
  std::array<double, 3> lengths{1.0, 1.0, 1.0};

  Grid make() const;
};

struct RunConfig {
  /// nullopt means "auto": 0.9 x the intersected stability limits.
  std::optional<double> dt;
  double t_end = 0.0;
  int sample_every = 10;
  std::uint64_t seed = 0;
  /// Step a (rho, sigma) pair alongside the species and report the deviation.
  bool rho_sigma_shadow = false;
};

struct OutputConfig {
  std::string directory = "out";
  bool diagnostics = true;
  bool fields = false;
  /// Field dump cadence in steps; 0 dumps the final state only.
  int field_every = 0;
};

struct CheckpointConfig {
  /// 0 disables periodic checkpoints.
  std::uint64_t every_n_steps = 0;
  /// Empty means <output.directory>/checkpoint.bin.
  std::string path;
};

/// Whole-run configuration. Loaded from a JSON document:
///
///   {
///     "grid":     {"dim": 2, "cells": [32, 32], "lengths": [1, 1]},
///     "params":   {"epsilon": 1, "K": 1, "nu": 1, "tau": 1, "fluid_model": "NPS"},
///     "species":  [{"name": "cation", "valence": 1, "diffusivity": 1,
///                   "bc": "blocking", "initial": {"profile": "gaussian", ...}}],
///     "boundary": {"xi": {"kind": "constant", "value": 0}},
///     "run":      {"dt": "auto", "t_end": 1.0, "sample_every": 10, "seed": 0},
///     "output":   {"directory": "out", "formats": ["diagnostics"]},
///     "checkpoint": {"every_n_steps": 0, "path": ""}
///   }
///
/// Unknown keys anywhere are rejected.
struct SimConfig {
  GridConfig grid;
  PhysicalParams params;
  std::vector<SpeciesSpec> species;
  XiSpec xi;
  RunConfig run;
  OutputConfig output;
  CheckpointConfig checkpoint;

  std::string checkpoint_path() const;
};

/// Parse and validate. Throws ConfigError with "line L, column C" for syntax
/// errors and the offending key path for validation errors.
SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::string& path);

/// Full echo with every default filled in; parse_config(to_json(c)) == c.
std::string to_json(const SimConfig& config, int indent = 2);

/// Semantic checks shared by the parser and programmatic callers.
void validate(const SimConfig& config);

}  // namespace npsim
