#pragma once

#include <array>
#include <span>
#include <vector>

#include "npsim/grid.hpp"

namespace npsim {

/// Exact solver for operators of the form sum_a I x ... x T_a x ... x I on a
/// structured grid, where each T_a is a symmetric tridiagonal 1D stencil
/// (h^-2 * [-1 2 -1] scaled by `coefficient`) whose end diagonals are
/// modified by the boundary closure.
///
/// Each T_a is diagonalised once; a solve is a change of basis along every
/// axis, a pointwise division by the summed eigenvalues, and the inverse
/// change of basis. Zero modes (pure Neumann) are projected out, which yields
/// the mean-zero solution.
class SeparableSolver {
 public:
  /// `end_shift[a]` is added to the two end diagonals of T_a in units of
  /// coefficient/h_a^2 relative to the Neumann value 1. A shift of 0 gives
  /// homogeneous Neumann, larger values a Robin closure.
  SeparableSolver(const Grid& grid, double coefficient, std::array<double, 3> end_shift);

  /// x = A^+ b over interior cells.
  void solve(std::span<const double> b, std::span<double> x) const;
  /// y = A x.
  void apply(std::span<const double> x, std::span<double> y) const;
  double min_eigenvalue() const noexcept { return min_eig_; }
  double max_eigenvalue() const noexcept { return max_eig_; }

 private:
  void transform(std::span<double> data, bool forward) const;

  Grid grid_;
  double coefficient_;
  std::array<double, 3> end_diag_{};
  std::array<double, 3> off_diag_{};
  std::array<double, 3> mid_diag_{};
  // Row-major n_a x n_a eigenvector matrices; column m is mode m.
  std::array<std::vector<double>, 3> basis_;
  std::array<std::vector<double>, 3> eigenvalues_;
  std::vector<double> inv_lambda_;
  double min_eig_ = 0.0;
  double max_eig_ = 0.0;
  mutable std::vector<double> work_;
  mutable std::vector<double> scratch_;
};

}  // namespace npsim
