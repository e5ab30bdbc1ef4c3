#include "npsim/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "npsim/errors.hpp"
#include "npsim/fluid.hpp"
#include "npsim/io.hpp"
#include "npsim/nernst_planck.hpp"
#include "npsim/scenario.hpp"
#include "npsim/simulation.hpp"

namespace npsim {
namespace {

constexpr double kPi = std::numbers::pi;

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void finish(ConvergenceReport& r) {
  r.orders.clear();
  for (std::size_t k = 0; k + 1 < r.errors.size(); ++k) {
    r.orders.push_back(std::log2(r.errors[k] / r.errors[k + 1]));
  }
  r.fitted_order = fit_slope(r.levels, r.errors);
  r.passed = r.fitted_order >= r.target_order;
}

Grid unit_square(int n) { return Grid(2, {n, n, 1}, {1.0, 1.0, 1.0}); }

ConvergenceReport poisson_robin_case() {
  ConvergenceReport r;
  r.case_name = "poisson_robin";
  r.parameter = "h";
  r.target_order = 1.9;
  const double eps = 0.5;
  const double tau = 2.0;
  const double L0 = 1.0;
  const double L1 = 0.5;
  auto exact = [&](double x, double y) { return std::cos(kPi * x / L0) * std::cos(kPi * y / L1); };
  for (int n : {16, 32, 64, 128}) {
    Grid g(2, {n, n, 1}, {L0, L1, 1.0});
    RobinPoissonProblem problem{ScalarField(g), eps, tau, {}, {20000, 1e-11}};
    const double k2 = kPi * kPi * (1.0 / (L0 * L0) + 1.0 / (L1 * L1));
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      const auto x = g.cell_center(c);
      problem.rho[c] = eps * k2 * exact(x[0], x[1]);
    }
    for (const auto& f : g.boundary_faces()) {
      const double x = f.center[0];
      const double y = f.center[1];
      const double dx = -kPi / L0 * std::sin(kPi * x / L0) * std::cos(kPi * y / L1);
      const double dy = -kPi / L1 * std::cos(kPi * x / L0) * std::sin(kPi * y / L1);
      const double dn = f.side * (f.axis == 0 ? dx : dy);
      problem.xi.xi.push_back(dn + tau * exact(x, y));
    }
    const auto phi = solve_potential(problem);
    double err = 0.0;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      const auto x = g.cell_center(c);
      err = std::max(err, std::abs(phi[c] - exact(x[0], x[1])));
    }
    r.cells.push_back(n);
    r.levels.push_back(g.spacing(0));
    r.errors.push_back(err);
  }
  finish(r);
  return r;
}

SpeciesSpec neutral_species(double D) { return SpeciesSpec{"s", 0.0, D, SpeciesBc::Blocking, 0.0, {}}; }

/// Forward Euler on the z = 0 species with an optional cellwise source added
/// after each transport step; returns the state at t_end.
void march(SimState& state, const SpeciesSpec& spec, double dt, int steps,
           const std::function<double(double, double, double)>& source) {
  const Grid& g = state.grid();
  std::vector<SpeciesSpec> one{spec};
  std::vector<double> f(g.cell_count());
  for (int s = 0; s < steps; ++s) {
    if (source) {
      for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const auto x = g.cell_center(c);
        f[c] = source(x[0], x[1], state.t);
      }
    }
    advance_concentrations(state, one, dt);
    if (source) {
      auto c = state.concentrations[0].interior();
      for (std::size_t i = 0; i < c.size(); ++i) c[i] += dt * f[i];
    }
    state.t += dt;
  }
}

SimState neutral_state(const Grid& g, const std::function<double(double, double)>& init) {
  SimState state(g, 1);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const auto x = g.cell_center(c);
    state.concentrations[0][c] = init(x[0], x[1]);
  }
  state.potential.fill(0.0);
  state.potential.set_ghosts_ready(true);
  return state;
}

std::vector<ConvergenceReport> diffusion_blocking_case() {
  const double D = 1.0;
  const double a = 0.5;
  const double t_end = 0.05;
  auto mode = [](double x, double y) { return std::cos(kPi * x) * std::cos(kPi * y); };
  auto init = [&](double x, double y) { return 1.0 + a * mode(x, y); };

  ConvergenceReport space;
  space.case_name = "diffusion_blocking";
  space.parameter = "h";
  space.target_order = 1.9;
  for (int n : {16, 32, 64}) {
    const Grid g = unit_square(n);
    const double h = g.spacing(0);
    const int steps = static_cast<int>(std::ceil(t_end / (0.05 * h * h)));
    const double dt = t_end / steps;
    SimState state = neutral_state(g, init);
    march(state, neutral_species(D), dt, steps, {});
    const double decay = std::exp(-2.0 * kPi * kPi * D * t_end);
    double err = 0.0;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      const auto x = g.cell_center(c);
      err = std::max(err, std::abs(state.concentrations[0][c] - (1.0 + a * mode(x[0], x[1]) * decay)));
    }
    space.cells.push_back(n);
    space.levels.push_back(h);
    space.errors.push_back(err);
  }
  finish(space);

  // Against the exact semi-discrete solution: the cosine mode is an
  // eigenvector of the cell-centred Neumann Laplacian, so only the time error
  // remains.
  ConvergenceReport time;
  time.case_name = "diffusion_blocking";
  time.parameter = "dt";
  time.target_order = 0.9;
  const int n = 16;
  const Grid g = unit_square(n);
  const double h = g.spacing(0);
  const double lambda = 2.0 * 4.0 / (h * h) * std::pow(std::sin(kPi * h / 2.0), 2);
  int steps = 64;
  for (int level = 0; level < 3; ++level, steps *= 2) {
    const double dt = t_end / steps;
    SimState state = neutral_state(g, init);
    march(state, neutral_species(D), dt, steps, {});
    const double decay = std::exp(-D * lambda * t_end);
    double err = 0.0;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      const auto x = g.cell_center(c);
      err = std::max(err, std::abs(state.concentrations[0][c] - (1.0 + a * mode(x[0], x[1]) * decay)));
    }
    time.cells.push_back(n);
    time.levels.push_back(dt);
    time.errors.push_back(err);
  }
  finish(time);
  return {space, time};
}

ConvergenceReport advection_diffusion_case() {
  ConvergenceReport r;
  r.case_name = "advection_diffusion_frozen_u";
  r.parameter = "h";
  r.target_order = 0.9;
  const double D = 0.05;
  const double a = 0.5;
  const double t_end = 0.2;
  auto psi = [](double x, double y) {
    const double sx = std::sin(kPi * x);
    const double sy = std::sin(kPi * y);
    return sx * sx * sy * sy / kPi;
  };
  auto ux = [](double x, double y) { return std::pow(std::sin(kPi * x), 2) * std::sin(2.0 * kPi * y); };
  auto uy = [](double x, double y) { return -std::sin(2.0 * kPi * x) * std::pow(std::sin(kPi * y), 2); };
  auto exact = [&](double x, double y, double t) {
    return 1.0 + a * std::cos(kPi * x) * std::cos(kPi * y) * std::exp(-t);
  };
  auto source = [&](double x, double y, double t) {
    const double e = a * std::exp(-t);
    const double cc = std::cos(kPi * x) * std::cos(kPi * y);
    const double cx = -kPi * e * std::sin(kPi * x) * std::cos(kPi * y);
    const double cy = -kPi * e * std::cos(kPi * x) * std::sin(kPi * y);
    return -e * cc + ux(x, y) * cx + uy(x, y) * cy + D * 2.0 * kPi * kPi * e * cc;
  };
  for (int n : {16, 32, 64}) {
    const Grid g = unit_square(n);
    const double h = g.spacing(0);
    SimState state = neutral_state(g, [&](double x, double y) { return exact(x, y, 0.0); });
    // Face velocities from differences of the stream function, so the
    // discrete divergence vanishes identically.
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i <= n; ++i) {
        const double x = i * h;
        const double y = (j + 0.5) * h;
        state.velocity.at(0, i, j) = (psi(x, y + h / 2) - psi(x, y - h / 2)) / h;
      }
    }
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) * h;
        const double y = j * h;
        state.velocity.at(1, i, j) = -(psi(x + h / 2, y) - psi(x - h / 2, y)) / h;
      }
    }
    const auto spec = neutral_species(D);
    const double limit = positivity_dt_limit(spec, state.potential, state.velocity);
    const int steps = static_cast<int>(std::ceil(t_end / (0.5 * limit)));
    march(state, spec, t_end / steps, steps, source);
    double err = 0.0;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      const auto x = g.cell_center(c);
      err = std::max(err, std::abs(state.concentrations[0][c] - exact(x[0], x[1], t_end)));
    }
    r.cells.push_back(n);
    r.levels.push_back(h);
    r.errors.push_back(err);
  }
  finish(r);
  return r;
}

struct TraceFunction {
  std::string label;
  std::function<double(double, double)> value;
  std::function<double(double, double)> grad_norm;
};

std::vector<TraceFunction> trace_family(TraceFamily family, std::uint64_t seed) {
  std::vector<TraceFunction> out;
  switch (family) {
    case TraceFamily::Constant:
      out.push_back({"one", [](double, double) { return 1.0; }, [](double, double) { return 0.0; }});
      break;
    case TraceFamily::Zero:
      out.push_back({"zero", [](double, double) { return 0.0; }, [](double, double) { return 0.0; }});
      break;
    case TraceFamily::BoundaryPeaked:
      for (double w : {0.1, 0.2, 0.4}) {
        auto f = [w](double x, double y) {
          const double d = std::min({x, 1.0 - x, y, 1.0 - y});
          return std::exp(-d / w);
        };
        char label[32];
        std::snprintf(label, sizeof label, "peak w=%.1f", w);
        out.push_back({label, f, [f, w](double x, double y) { return f(x, y) / w; }});
      }
      break;
    case TraceFamily::RandomFourier: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> coef(-1.0, 1.0);
      std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
      constexpr int kModes = 4;
      for (int sample = 0; sample < 8; ++sample) {
        struct Term {
          double a, kx, ky, px, py;
        };
        std::vector<Term> terms;
        for (int kx = 0; kx <= kModes; ++kx) {
          for (int ky = 0; ky <= kModes; ++ky) {
            terms.push_back({coef(rng), kx * kPi, ky * kPi, phase(rng), phase(rng)});
          }
        }
        auto f = [terms](double x, double y) {
          double v = 0.0;
          for (const auto& t : terms) v += t.a * std::cos(t.kx * x + t.px) * std::cos(t.ky * y + t.py);
          return v;
        };
        auto g = [terms](double x, double y) {
          double gx = 0.0, gy = 0.0;
          for (const auto& t : terms) {
            gx -= t.a * t.kx * std::sin(t.kx * x + t.px) * std::cos(t.ky * y + t.py);
            gy -= t.a * t.ky * std::cos(t.kx * x + t.px) * std::sin(t.ky * y + t.py);
          }
          return std::hypot(gx, gy);
        };
        out.push_back({"fourier #" + std::to_string(sample), f, g});
      }
      break;
    }
  }
  return out;
}

}  // namespace

ScalarField dense_poisson_oracle(const RobinPoissonProblem& problem, DenseSolveInfo* info) {
  const Grid& g = problem.rho.grid();
  const std::size_t n = g.cell_count();
  if (n > kDenseOracleMaxUnknowns) {
    throw ConfigError("dense Poisson oracle is limited to " + std::to_string(kDenseOracleMaxUnknowns) +
                      " unknowns, got " + std::to_string(n));
  }
  if (problem.xi.xi.size() != g.boundary_face_count()) {
    throw ConfigError("xi must have one value per boundary face");
  }
  const double eps = problem.epsilon;
  const double tau = problem.tau;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd b(static_cast<Eigen::Index>(n));
  const auto& cells = g.cells();
  for (int k = 0; k < cells[2]; ++k) {
    for (int j = 0; j < cells[1]; ++j) {
      for (int i = 0; i < cells[0]; ++i) {
        const std::array<int, 3> pos{i, j, k};
        const auto row = static_cast<Eigen::Index>(g.index(i, j, k));
        b(row) = problem.rho[static_cast<std::size_t>(row)];
        for (int axis = 0; axis < g.dim(); ++axis) {
          const double h = g.spacing(axis);
          for (int side : {-1, 1}) {
            std::array<int, 3> nb = pos;
            nb[axis] += side;
            if (nb[axis] >= 0 && nb[axis] < cells[axis]) {
              const auto col = static_cast<Eigen::Index>(g.index(nb[0], nb[1], nb[2]));
              A(row, row) += eps / (h * h);
              A(row, col) -= eps / (h * h);
            } else {
              // Wall value from (w - c)/(h/2) + tau w = xi; the wall flux
              // eps (w - c)/(h/2) / h then splits into matrix and data parts.
              const double xi = problem.xi.xi[g.boundary_face_index(static_cast<std::size_t>(row), axis, side)];
              const double s = eps / (h * (1.0 + 0.5 * tau * h));
              A(row, row) += s * tau;
              b(row) += s * xi;
            }
          }
        }
      }
    }
  }
  DenseSolveInfo local;
  local.symmetry_error = (A - A.transpose()).cwiseAbs().maxCoeff();
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    if (info) *info = local;
    throw InvariantViolation("verification", "dense Poisson matrix is not positive definite");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  local.min_pivot = L.diagonal().array().square().minCoeff();
  local.positive_definite = local.min_pivot > 0.0;
  if (info) *info = local;
  const Eigen::VectorXd x = llt.solve(b);

  ScalarField phi(g);
  for (std::size_t c = 0; c < n; ++c) phi[c] = x(static_cast<Eigen::Index>(c));
  const auto faces = g.boundary_faces();
  auto ghosts = phi.ghosts();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const double h = g.spacing(faces[f].axis);
    const double c = phi[faces[f].cell];
    const double w = (2.0 * c / h + problem.xi.xi[f]) / (2.0 / h + tau);
    ghosts[f] = 2.0 * w - c;
  }
  phi.set_ghosts_ready(true);
  return phi;
}

std::vector<std::string> mms_case_names() {
  return {"poisson_robin", "diffusion_blocking", "advection_diffusion_frozen_u"};
}

std::vector<ConvergenceReport> mms_convergence(const std::string& case_name) {
  if (case_name == "poisson_robin") return {poisson_robin_case()};
  if (case_name == "diffusion_blocking") return diffusion_blocking_case();
  if (case_name == "advection_diffusion_frozen_u") return {advection_diffusion_case()};
  std::string names;
  for (const auto& n : mms_case_names()) names += (names.empty() ? "" : ", ") + n;
  throw ConfigError("unknown convergence case '" + case_name + "' (available: " + names + ")");
}

std::string format_report(const ConvergenceReport& r) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%s (%s refinement, target order %.2f)\n", r.case_name.c_str(),
                r.parameter.c_str(), r.target_order);
  out << line;
  for (std::size_t k = 0; k < r.errors.size(); ++k) {
    std::snprintf(line, sizeof line, "  n=%-4d %s=%-12.4e err=%-12.4e", r.cells[k], r.parameter.c_str(),
                  r.levels[k], r.errors[k]);
    out << line;
    if (k > 0) {
      std::snprintf(line, sizeof line, " order=%.3f", r.orders[k - 1]);
      out << line;
    }
    out << '\n';
  }
  std::snprintf(line, sizeof line, "  fitted order %.3f: %s\n", r.fitted_order, r.passed ? "ok" : "BELOW TARGET");
  out << line;
  return out.str();
}

RhoSigmaReport rho_sigma_equivalence(SimConfig config, std::uint64_t steps) {
  common_valence_and_diffusivity(config.species);
  config.run.rho_sigma_shadow = true;
  config.run.t_end = std::numeric_limits<double>::max();
  Simulation sim(std::move(config));
  RunOptions opts;
  opts.write_outputs = false;
  opts.stop_at_step = steps;
  const auto summary = sim.run(opts);
  if (summary.exit_code != kExitOk) {
    throw InvariantViolation("verification", "rho/sigma run failed: " + summary.error_message);
  }
  return {summary.rho_sigma_deviation, summary.steps, summary.t};
}

const char* to_string(TraceFamily f) noexcept {
  switch (f) {
    case TraceFamily::Constant:
      return "constant";
    case TraceFamily::Zero:
      return "zero";
    case TraceFamily::BoundaryPeaked:
      return "boundary_peaked";
    case TraceFamily::RandomFourier:
      return "random_fourier";
  }
  return "?";
}

TraceCheckReport trace_inequality_check(std::span<const int> levels, TraceFamily family, double p,
                                        std::uint64_t seed) {
  if (!(p >= 2.0 && p <= 4.0)) throw ConfigError("trace check needs p in [2, 4]");
  if (levels.empty()) throw ConfigError("trace check needs at least one grid level");
  TraceCheckReport report;
  report.family = family;
  report.p = p;
  const auto samples = trace_family(family, seed);
  for (int n : levels) {
    if (n < 2) throw ConfigError("trace check grid levels must be >= 2");
    const double h = 1.0 / n;
    double level_max = 0.0;
    double level_h1_max = 0.0;
    for (const auto& f : samples) {
      double bnd = 0.0;
      for (int i = 0; i < n; ++i) {
        const double s = (i + 0.5) * h;
        for (const auto& [x, y] : {std::pair{s, 0.0}, std::pair{s, 1.0}, std::pair{0.0, s}, std::pair{1.0, s}}) {
          bnd += std::pow(std::abs(f.value(x, y)), p) * h;
        }
      }
      double grad2 = 0.0, lp = 0.0, lq = 0.0, l2 = 0.0;
      const double q = 2.0 * (p - 1.0);
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          const double x = (i + 0.5) * h;
          const double y = (j + 0.5) * h;
          const double v = std::abs(f.value(x, y));
          const double gn = f.grad_norm(x, y);
          grad2 += gn * gn * h * h;
          lp += std::pow(v, p) * h * h;
          lq += std::pow(v, q) * h * h;
          l2 += v * v * h * h;
        }
      }
      TraceSample s;
      s.label = f.label;
      s.cells = n;
      s.boundary_norm = std::pow(bnd, 1.0 / p);
      const double rhs = std::pow(std::sqrt(grad2), 1.0 / p) * std::pow(std::pow(lq, 1.0 / q), (p - 1.0) / p) +
                         std::pow(lp, 1.0 / p);
      const double h1 = std::sqrt(l2 + grad2);
      s.ratio = s.boundary_norm > 0.0 ? s.boundary_norm / rhs : 0.0;
      s.h1_ratio = s.boundary_norm > 0.0 ? s.boundary_norm / h1 : 0.0;
      level_max = std::max(level_max, s.ratio);
      level_h1_max = std::max(level_h1_max, s.h1_ratio);
      report.samples.push_back(s);
    }
    report.cells.push_back(n);
    report.max_ratio.push_back(level_max);
    report.max_h1_ratio.push_back(level_h1_max);
  }
  const auto m = report.max_ratio.size();
  if (m >= 2) {
    const double prev = report.max_ratio[m - 2];
    const double last = report.max_ratio[m - 1];
    report.variation = prev > 0.0 ? std::abs(last - prev) / prev : (last > 0.0 ? 1.0 : 0.0);
  }
  report.passed = m >= 2 && report.variation < 0.2;
  return report;
}

BudgetStudyReport budget_refinement_study(SimConfig config, double dt0, double t_end, int count) {
  if (count < 2) throw ConfigError("budget study needs at least two dt levels");
  if (!(dt0 > 0.0) || !(t_end > 0.0)) throw ConfigError("budget study needs dt0 > 0 and t_end > 0");
  BudgetStudyReport report;
  double dt = dt0;
  for (int level = 0; level < count; ++level, dt *= 0.5) {
    SimConfig c = config;
    c.run.dt = dt;
    c.run.t_end = t_end;
    Simulation sim(std::move(c));
    RunOptions opts;
    opts.write_outputs = false;
    const auto summary = sim.run(opts);
    if (summary.exit_code != kExitOk) {
      throw InvariantViolation("verification", "budget study run failed at dt=" + std::to_string(dt) + ": " +
                                                   summary.error_message);
    }
    report.levels.push_back({dt, summary.steps, summary.max_abs_budget_residual});
  }
  report.passed = true;
  for (std::size_t k = 0; k + 1 < report.levels.size(); ++k) {
    const double ratio = report.levels[k + 1].max_abs_residual / report.levels[k].max_abs_residual;
    report.ratios.push_back(ratio);
    if (!(ratio <= 0.65)) report.passed = false;
  }
  return report;
}

double lyapunov_oracle(const SimState& state, std::span<const SpeciesSpec> species, const PhysicalParams& params,
                       std::span<const double> xi) {
  const Grid& g = state.grid();
  const auto& cells = g.cells();
  const double vol = g.cell_volume();
  const auto& phi = state.potential;

  double entropy = 0.0;
  for (std::size_t s = 0; s < species.size(); ++s) {
    for (double c : state.concentrations[s].interior()) {
      if (c > 0.0) entropy += c * std::log(c) * vol;
    }
  }

  double grad = 0.0;
  double wall = 0.0;
  for (int k = 0; k < cells[2]; ++k) {
    for (int j = 0; j < cells[1]; ++j) {
      for (int i = 0; i < cells[0]; ++i) {
        const std::array<int, 3> pos{i, j, k};
        const std::size_t cell = g.index(i, j, k);
        for (int axis = 0; axis < g.dim(); ++axis) {
          const double h = g.spacing(axis);
          if (pos[axis] + 1 < cells[axis]) {
            std::array<int, 3> nb = pos;
            nb[axis] += 1;
            const double d = (phi[g.index(nb[0], nb[1], nb[2])] - phi[cell]) / h;
            grad += d * d * vol;
          }
          for (int side : {-1, 1}) {
            const bool at_wall = side < 0 ? pos[axis] == 0 : pos[axis] == cells[axis] - 1;
            if (!at_wall) continue;
            const double x = xi[g.boundary_face_index(cell, axis, side)];
            const double w = (2.0 * phi[cell] / h + x) / (2.0 / h + params.tau);
            const double d = (w - phi[cell]) / (0.5 * h);
            grad += d * d * 0.5 * vol;
            wall += w * w * vol / h;
          }
        }
      }
    }
  }

  double u_sq = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    const auto ua = state.velocity.component(a);
    std::array<int, 3> extent = cells;
    extent[a] += 1;
    for (int k = 0; k < extent[2]; ++k) {
      for (int j = 0; j < extent[1]; ++j) {
        for (int i = 0; i < extent[0]; ++i) {
          const std::array<int, 3> pos{i, j, k};
          const double v = ua[g.face_index(a, i, j, k)];
          const double weight = (pos[a] == 0 || pos[a] == cells[a]) ? 0.5 : 1.0;
          u_sq += weight * v * v * vol;
        }
      }
    }
  }
  return u_sq / (2.0 * params.K) + entropy + 0.5 * params.epsilon * grad +
         0.5 * params.epsilon * params.tau * wall;
}

StaggeredVectorField random_solenoidal(const Grid& grid, std::uint64_t seed, double amplitude) {
  if (grid.dim() != 2) throw ConfigError("random_solenoidal is 2D only");
  const int nx = grid.cells(0);
  const int ny = grid.cells(1);
  const double hx = grid.spacing(0);
  const double hy = grid.spacing(1);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  // Nodal stream function, zero on the wall nodes.
  std::vector<double> psi(static_cast<std::size_t>((nx + 1) * (ny + 1)), 0.0);
  auto node = [&](int i, int j) -> double& { return psi[static_cast<std::size_t>(i + (nx + 1) * j)]; };
  for (int j = 1; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) node(i, j) = amplitude * U(rng) * hx;
  }
  StaggeredVectorField u(grid);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) u.at(0, i, j) = (node(i, j + 1) - node(i, j)) / hy;
  }
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) u.at(1, i, j) = -(node(i + 1, j) - node(i, j)) / hx;
  }
  return u;
}

bool SuiteReport::passed() const noexcept {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

namespace {

CheckResult check(std::string name, double value, const std::string& relation, double limit) {
  CheckResult c{std::move(name), value, limit, relation, false};
  if (relation == "<=") c.passed = value <= limit;
  else if (relation == "<") c.passed = value < limit;
  else if (relation == ">=") c.passed = value >= limit;
  else if (relation == ">") c.passed = value > limit;
  return c;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

RobinPoissonProblem random_poisson_problem(int n, std::uint64_t seed) {
  const Grid g = unit_square(n);
  RobinPoissonProblem pr{ScalarField(g), 0.7, 1.3, {}, {20000, 1e-12}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (std::size_t c = 0; c < g.cell_count(); ++c) pr.rho[c] = U(rng);
  for (std::size_t b = 0; b < g.boundary_face_count(); ++b) pr.xi.xi.push_back(U(rng));
  return pr;
}

std::vector<SpeciesSpec> ion_pair(double D1 = 1.0, double D2 = 1.0) {
  return {SpeciesSpec{"cation", 1.0, D1, SpeciesBc::Blocking, 0.0, {}},
          SpeciesSpec{"anion", -1.0, D2, SpeciesBc::Blocking, 0.0, {}}};
}

/// Random positive concentrations, Phi from a Robin solve with random xi,
/// random divergence-free velocity.
SimState random_state(const Grid& g, std::span<const SpeciesSpec> species, const PhysicalParams& params,
                      BoundaryData& xi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.2, 2.0);
  SimState state(g, species.size());
  for (auto& c : state.concentrations) {
    for (auto& v : c.interior()) v = U(rng);
  }
  xi.xi.clear();
  for (std::size_t b = 0; b < g.boundary_face_count(); ++b) xi.xi.push_back(U(rng) - 1.0);
  RobinPoissonSolver solver(g, params.epsilon, params.tau, Preconditioner::Separable, {20000, 1e-12});
  const auto rho = charge_density(state, species);
  solver.solve(rho.interior(), xi.xi, state.potential);
  state.velocity = random_solenoidal(g, seed + 1, 0.5);
  return state;
}

SuiteReport poisson_suite() {
  SuiteReport r;
  for (int n : {4, 32, 64}) {
    const auto pr = random_poisson_problem(n, 11 + static_cast<std::uint64_t>(n));
    DenseSolveInfo info;
    const auto dense = dense_poisson_oracle(pr, &info);
    const auto iter = solve_potential(pr);
    const std::string tag = std::to_string(n) + "x" + std::to_string(n);
    r.checks.push_back(check("dense agreement " + tag, max_diff(dense.interior(), iter.interior()), "<=", 1e-12));
    r.checks.push_back(check("matrix symmetry " + tag, info.symmetry_error, "<=", 1e-14));
    r.checks.push_back(check("min pivot " + tag, info.min_pivot, ">", 0.0));
  }
  for (const auto& [xi0, tau] : {std::pair{1.3, 1.3}, std::pair{0.7, 2.5}}) {
    const Grid g = unit_square(16);
    RobinPoissonProblem pr{ScalarField(g, 0.0), 0.5, tau, {}, {}};
    pr.xi.xi.assign(g.boundary_face_count(), xi0);
    const auto phi = solve_potential(pr);
    double err = 0.0;
    for (double v : phi.interior()) err = std::max(err, std::abs(v - xi0 / tau));
    char name[64];
    std::snprintf(name, sizeof name, "constant solution xi=%.1f tau=%.1f", xi0, tau);
    r.checks.push_back(check(name, err, "<=", 1e-10));
  }
  const auto mms = mms_convergence("poisson_robin").front();
  r.checks.push_back(check("mms poisson_robin order", mms.fitted_order, ">=", mms.target_order));
  return r;
}

SuiteReport np_suite() {
  SuiteReport r;
  {
    const Grid g = unit_square(16);
    const auto spec = neutral_species(1.0);
    SimState state = neutral_state(g, [](double x, double y) {
      return 0.1 + std::exp(-((x - 0.3) * (x - 0.3) + (y - 0.6) * (y - 0.6)) / 0.02);
    });
    const double m0 = integrate_cells(state.concentrations[0]);
    const double dt = 0.9 * positivity_dt_limit(spec, state.potential, state.velocity);
    std::vector<SpeciesSpec> one{spec};
    double drift = 0.0;
    double linf = *std::max_element(state.concentrations[0].interior().begin(),
                                    state.concentrations[0].interior().end());
    int increases = 0;
    for (int s = 0; s < 1000; ++s) {
      advance_concentrations(state, one, dt);
      drift = std::max(drift, std::abs(integrate_cells(state.concentrations[0]) - m0) / m0);
      const auto c = state.concentrations[0].interior();
      const double m = *std::max_element(c.begin(), c.end());
      if (m > linf) ++increases;
      linf = m;
    }
    r.checks.push_back(check("neutral diffusion mass drift (1000 steps)", drift, "<=", 1e-12));
    r.checks.push_back(check("neutral diffusion Linf increases", increases, "<=", 0));
  }
  {
    const Grid g = unit_square(24);
    const auto species = ion_pair(1.0, 0.5);
    PhysicalParams params;
    params.epsilon = 0.1;
    BoundaryData xi;
    SimState state = random_state(g, species, params, xi, 5);
    std::vector<double> m0;
    for (const auto& c : state.concentrations) m0.push_back(integrate_cells(c));
    const double dt = stable_concentration_dt(species, state.potential, state.velocity);
    double drift = 0.0;
    double cmin = state.min_concentration();
    for (int s = 0; s < 200; ++s) {
      advance_concentrations(state, species, dt);
      for (std::size_t i = 0; i < species.size(); ++i) {
        drift = std::max(drift, std::abs(integrate_cells(state.concentrations[i]) - m0[i]) / m0[i]);
      }
      cmin = std::min(cmin, state.min_concentration());
    }
    r.checks.push_back(check("charged advected mass drift (200 steps)", drift, "<=", 1e-12));
    r.checks.push_back(check("charged advected min concentration", cmin, ">=", 0.0));
    bool threw = false;
    try {
      advance_concentrations(state, species, 2.0 * dt / 0.9);
    } catch (const InvariantViolation&) {
      threw = true;
    }
    r.checks.push_back(check("dt above positivity limit rejected", threw ? 1.0 : 0.0, ">=", 1.0));
  }
  {
    // Boltzmann state on a frozen nonuniform potential.
    const Grid g = unit_square(16);
    const auto species = ion_pair(1.0, 0.7);
    SimState state(g, species.size());
    RobinPoissonProblem pr{ScalarField(g), 0.1, 1.0, {}, {}};
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      const auto x = g.cell_center(c);
      pr.rho[c] = std::sin(3.0 * x[0]) * std::cos(2.0 * x[1]);
    }
    for (const auto& f : g.boundary_faces()) pr.xi.xi.push_back(0.5 * f.center[0] - 0.2 * f.center[1]);
    state.potential = solve_potential(pr);
    const double A[2] = {1.3, 0.8};
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t c = 0; c < g.cell_count(); ++c) {
        state.concentrations[i][c] = A[i] * std::exp(-species[i].valence * state.potential[c]);
      }
    }
    const double dt = stable_concentration_dt(species, state.potential, state.velocity);
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
      const auto before = state.concentrations;
      advance_concentrations(state, species, dt);
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
          worst = std::max(worst, std::abs(state.concentrations[i][c] - before[i][c]) / before[i][c]);
        }
      }
    }
    r.checks.push_back(check("Boltzmann equilibrium change per step (100 steps)", worst, "<=", 1e-13));
  }
  for (const auto& name : {"diffusion_blocking", "advection_diffusion_frozen_u"}) {
    for (const auto& rep : mms_convergence(name)) {
      r.checks.push_back(check("mms " + rep.case_name + " " + rep.parameter + " order", rep.fitted_order, ">=",
                               rep.target_order));
    }
  }
  return r;
}

SuiteReport fluid_suite() {
  SuiteReport r;
  PhysicalParams params;
  params.fluid_model = FluidModel::NPS;
  {
    const Grid g = unit_square(8);
    FluidSolver solver(g, params);
    auto u = random_solenoidal(g, 3);
    ScalarField p(g);
    const StaggeredVectorField zero(g);
    const double dt = solver.stable_dt(u);
    int non_decreasing = 0;
    double div = 0.0;
    for (int s = 0; s < 50; ++s) {
      const auto rep = solver.step(u, p, zero, dt);
      if (!(rep.kinetic_energy_after < rep.kinetic_energy_before)) ++non_decreasing;
      div = std::max(div, rep.divergence_after);
    }
    r.checks.push_back(check("force-free Stokes energy non-decreasing steps (8x8, 50 steps)", non_decreasing,
                             "<=", 0));
    r.checks.push_back(check("force-free divergence", div, "<=", 1e-10));
  }
  {
    const Grid g = unit_square(32);
    FluidSolver solver(g, params);
    StaggeredVectorField u(g);
    ScalarField p(g);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double dt = solver.stable_dt(u);
    double div = 0.0;
    for (int s = 0; s < 20; ++s) {
      StaggeredVectorField force(g);
      for (int a = 0; a < 2; ++a) {
        for (auto& v : force.component(a)) v = 50.0 * U(rng);
      }
      force.enforce_no_slip();
      div = std::max(div, solver.step(u, p, force, dt).divergence_after);
    }
    r.checks.push_back(check("random-force post-projection divergence (32x32)", div, "<=", 1e-10));
  }
  {
    const Grid g = unit_square(32);
    FluidSolver solver(g, params);
    StaggeredVectorField u(g);
    ScalarField p(g);
    std::vector<double> q(g.cell_count());
    for (std::size_t c = 0; c < q.size(); ++c) {
      const auto x = g.cell_center(c);
      q[c] = std::sin(2.0 * x[0] + 1.0) * std::exp(x[1]) + x[0] * x[1];
    }
    StaggeredVectorField force(g);
    const double h = g.spacing(0);
    for (int j = 0; j < 32; ++j) {
      for (int i = 1; i < 32; ++i) {
        force.at(0, i, j) = (q[g.index(i, j)] - q[g.index(i - 1, j)]) / h;
        force.at(1, j, i) = (q[g.index(j, i)] - q[g.index(j, i - 1)]) / h;
      }
    }
    solver.step(u, p, force, solver.stable_dt(u));
    double umax = 0.0;
    for (int a = 0; a < 2; ++a) {
      for (double v : u.component(a)) umax = std::max(umax, std::abs(v));
    }
    r.checks.push_back(check("gradient force annihilated", umax, "<=", 1e-10));
  }
  {
    const Grid g = unit_square(16);
    const auto u = random_solenoidal(g, 21);
    const double norm = velocity_gradient_norms(u).grad_sq;
    RegularityMonitor mon;
    double T = 0.0;
    for (int s = 0; s < 37; ++s) {
      const double dt = 1e-3 * (1.0 + 0.1 * (s % 5));
      mon.accumulate(velocity_gradient_norms(u).grad_sq, dt);
      T += dt;
    }
    const double hand = T * norm * norm;
    r.checks.push_back(check("U(T) rectangle rule on constant norm", std::abs(mon.value() - hand) / hand, "<=",
                             1e-12));
  }
  return r;
}

SuiteReport energy_suite() {
  SuiteReport r;
  {
    const Grid g = Grid(2, {20, 12, 1}, {1.0, 0.6, 1.0});
    const auto species = ion_pair(1.0, 0.5);
    PhysicalParams params;
    params.epsilon = 0.3;
    params.tau = 0.8;
    params.K = 2.0;
    double worst = 0.0;
    double dmin = std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      BoundaryData xi;
      const SimState state = random_state(g, species, params, xi, seed);
      const double v = lyapunov(state, species, params);
      const double o = lyapunov_oracle(state, species, params, xi.xi);
      worst = std::max(worst, std::abs(v - o) / std::max(1.0, std::abs(o)));
      dmin = std::min(dmin, dissipation(state, species));
    }
    r.checks.push_back(check("Lyapunov functional vs oracle (10 random states)", worst, "<=", 1e-12));
    r.checks.push_back(check("dissipation minimum (10 random states)", dmin, ">=", 0.0));
  }
  {
    SimConfig config = scenario("two_species_relaxation");
    Simulation probe(config);
    const auto study = budget_refinement_study(config, probe.resolved_dt(), 0.02, 3);
    for (std::size_t k = 0; k < study.ratios.size(); ++k) {
      const std::string tag = "budget residual ratio dt/" + std::to_string(1 << k) + " -> dt/" +
                              std::to_string(2 << k);
      r.checks.push_back(check(tag, study.ratios[k], "<=", 0.65));
      r.checks.push_back(check(tag + " (lower)", study.ratios[k], ">=", 0.3));
    }
  }
  {
    SimConfig config = scenario("two_species_relaxation");
    for (auto& s : config.species) {
      s.initial = ProfileSpec{};
      s.initial.base = 1.0;
    }
    config.run.t_end = 0.01;
    Simulation sim(config);
    RunOptions opts;
    opts.write_outputs = false;
    const auto summary = sim.run(opts);
    r.checks.push_back(check("budget residual at neutral equilibrium", summary.max_abs_budget_residual, "<=", 1e-12));
  }
  return r;
}

SuiteReport trace_suite() {
  SuiteReport r;
  const int levels[] = {16, 32, 64};
  for (double p : {2.0, 3.0, 4.0}) {
    for (auto family : {TraceFamily::BoundaryPeaked, TraceFamily::RandomFourier}) {
      const auto rep = trace_inequality_check(levels, family, p);
      char name[96];
      std::snprintf(name, sizeof name, "%s p=%.0f max-ratio variation 32->64", to_string(family), p);
      r.checks.push_back(check(name, rep.variation, "<", 0.2));
    }
  }
  const int one[] = {16};
  const auto c = trace_inequality_check(one, TraceFamily::Constant, 2.0);
  r.checks.push_back(check("constant f p=2 ratio - 2", std::abs(c.max_ratio[0] - 2.0), "<=", 1e-12));
  return r;
}

SuiteReport rho_sigma_suite() {
  SuiteReport r;
  r.checks.push_back(
      check("m=3 (1,1,-1) 16x16 500 steps", rho_sigma_equivalence(scenario("equal_diffusivity_m3"), 500).max_deviation,
            "<=", 1e-10));
  SimConfig pair = scenario("two_species_relaxation");
  pair.grid.cells = {16, 16, 1};
  for (auto& s : pair.species) s.diffusivity = 1.0;
  r.checks.push_back(check("m=2 (1,-1) 16x16 200 steps", rho_sigma_equivalence(pair, 200).max_deviation, "<=", 1e-12));
  SimConfig flat = pair;
  for (auto& s : flat.species) {
    s.initial.kind = ProfileKind::Gaussian;
    s.initial.base = 0.5;
    s.initial.amplitude = 0.5;
    s.initial.center = {0.4, 0.5, 0.5};
  }
  r.checks.push_back(check("zero-field heat equations 200 steps", rho_sigma_equivalence(flat, 200).max_deviation,
                           "<=", 1e-12));
  return r;
}

}  // namespace

std::vector<std::string> suite_names() { return {"poisson", "np", "fluid", "energy", "trace", "rho-sigma"}; }

SuiteReport run_suite(const std::string& name) {
  const auto start = std::chrono::steady_clock::now();
  SuiteReport r;
  if (name == "poisson") r = poisson_suite();
  else if (name == "np") r = np_suite();
  else if (name == "fluid") r = fluid_suite();
  else if (name == "energy") r = energy_suite();
  else if (name == "trace") r = trace_suite();
  else if (name == "rho-sigma") r = rho_sigma_suite();
  else {
    std::string names;
    for (const auto& n : suite_names()) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("unknown verification suite '" + name + "' (available: " + names + ")");
  }
  r.suite = name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string format_suite(const SuiteReport& report) {
  std::ostringstream out;
  out << "suite " << report.suite << '\n';
  char line[256];
  for (const auto& c : report.checks) {
    std::snprintf(line, sizeof line, "  [%s] %s: %.6e %s %.3e\n", c.passed ? " ok " : "FAIL", c.name.c_str(), c.value,
                  c.relation.c_str(), c.limit);
    out << line;
  }
  std::snprintf(line, sizeof line, "  %s in %.2fs\n", report.passed() ? "passed" : "FAILED", report.seconds);
  out << line;
  return out.str();
}

std::string suite_record(const SuiteReport& report) {
  nlohmann::json j;
  j["record"] = "verify";
  j["suite"] = report.suite;
  j["passed"] = report.passed();
  j["seconds"] = report.seconds;
  auto& checks = j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name}, {"value", nlohmann::json::parse(format_number(c.value))},
                      {"relation", c.relation}, {"limit", c.limit}, {"passed", c.passed}});
  }
  return j.dump();
}

}  // namespace npsim
