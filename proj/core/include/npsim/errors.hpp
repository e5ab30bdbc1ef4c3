#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace npsim {

/// Base of every error thrown by the library. `module()` names the subsystem
/// that raised it so the orchestrator can write a machine-readable record.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Invalid configuration or argument. Maps to exit code 2.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string key = {})
      : Error("config", what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Linear solver failed to reach its tolerance. Maps to exit code 3.
class SolverError : public Error {
 public:
  SolverError(std::string module, const std::string& what, double residual,
              int iterations)
      : Error(std::move(module), what),
        residual_(residual),
        iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// A structural invariant was broken (negative concentration, divergence,
/// step size above the stability bound, ...). Maps to exit code 4.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class NegativeConcentration : public InvariantViolation {
 public:
  NegativeConcentration(const std::string& what, std::size_t species,
                        std::size_t cell, double value, double suggested_dt)
      : InvariantViolation("nernst_planck", what),
        species_(species),
        cell_(cell),
        value_(value),
        suggested_dt_(suggested_dt) {}

  std::size_t species() const noexcept { return species_; }
  std::size_t cell() const noexcept { return cell_; }
  double value() const noexcept { return value_; }
  double suggested_dt() const noexcept { return suggested_dt_; }

 private:
  std::size_t species_;
  std::size_t cell_;
  double value_;
  double suggested_dt_;
};

}  // namespace npsim
