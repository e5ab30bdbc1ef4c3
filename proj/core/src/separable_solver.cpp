#include "npsim/separable_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace npsim {

SeparableSolver::SeparableSolver(const Grid& grid, double coefficient, std::array<double, 3> end_shift)
    : grid_(grid), coefficient_(coefficient) {
  for (int a = 0; a < grid_.dim(); ++a) {
    const int n = grid_.cells(a);
    const double s = coefficient / (grid_.spacing(a) * grid_.spacing(a));
    mid_diag_[a] = 2.0 * s;
    off_diag_[a] = -s;
    end_diag_[a] = (1.0 + end_shift[a]) * s;

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      t(i, i) = (i == 0 || i == n - 1) ? end_diag_[a] : mid_diag_[a];
      if (i + 1 < n) {
        t(i, i + 1) = off_diag_[a];
        t(i + 1, i) = off_diag_[a];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    basis_[a].resize(static_cast<std::size_t>(n) * n);
    eigenvalues_[a].resize(n);
    for (int r = 0; r < n; ++r) {
      eigenvalues_[a][r] = es.eigenvalues()(r);
      for (int m = 0; m < n; ++m) basis_[a][static_cast<std::size_t>(r) * n + m] = es.eigenvectors()(r, m);
    }
  }

  const std::size_t count = grid_.cell_count();
  inv_lambda_.resize(count);
  double lmax = 0.0;
  for (int a = 0; a < grid_.dim(); ++a) lmax += *std::max_element(eigenvalues_[a].begin(), eigenvalues_[a].end());
  const double zero_cut = 1e-12 * lmax;
  min_eig_ = std::numeric_limits<double>::infinity();
  max_eig_ = lmax;
  for (std::size_t c = 0; c < count; ++c) {
    const auto ijk = grid_.coords(c);
    double lambda = 0.0;
    for (int a = 0; a < grid_.dim(); ++a) lambda += eigenvalues_[a][ijk[a]];
    if (std::abs(lambda) <= zero_cut) {
      inv_lambda_[c] = 0.0;
    } else {
      inv_lambda_[c] = 1.0 / lambda;
      min_eig_ = std::min(min_eig_, lambda);
    }
  }
  work_.resize(count);
  scratch_.resize(count);
}

void SeparableSolver::transform(std::span<double> data, bool forward) const {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Block = Eigen::Map<Eigen::MatrixXd>;
  const std::size_t count = grid_.cell_count();
  for (int a = 0; a < grid_.dim(); ++a) {
    const Eigen::Index len = grid_.cells(a);
    const Eigen::Map<const RowMajor> q(basis_[a].data(), len, len);
    const auto lo = static_cast<Eigen::Index>(grid_.stride(a));
    const auto hi = static_cast<Eigen::Index>(count) / (lo * len);
    if (a == 0) {
      // Lines along x are the columns of an n0 x (rest) column-major matrix.
      Block x(data.data(), len, hi);
      Block out(scratch_.data(), len, hi);
      if (forward) {
        out.noalias() = q.transpose() * x;
      } else {
        out.noalias() = q * x;
      }
      x = out;
    } else {
      for (Eigen::Index h = 0; h < hi; ++h) {
        Block x(data.data() + h * lo * len, lo, len);
        Block out(scratch_.data(), lo, len);
        if (forward) {
          out.noalias() = x * q;
        } else {
          out.noalias() = x * q.transpose();
        }
        x = out;
      }
    }
  }
}

void SeparableSolver::solve(std::span<const double> b, std::span<double> x) const {
  const std::size_t count = grid_.cell_count();
  std::copy(b.begin(), b.begin() + count, work_.begin());
  transform(work_, true);
  for (std::size_t c = 0; c < count; ++c) work_[c] *= inv_lambda_[c];
  transform(work_, false);
  std::copy(work_.begin(), work_.end(), x.begin());
}

void SeparableSolver::apply(std::span<const double> x, std::span<double> y) const {
  const auto& n = grid_.cells();
  for (std::size_t c = 0; c < grid_.cell_count(); ++c) y[c] = 0.0;
  for (int a = 0; a < grid_.dim(); ++a) {
    const std::size_t s = grid_.stride(a);
    for (int k = 0; k < n[2]; ++k) {
      for (int j = 0; j < n[1]; ++j) {
        for (int i = 0; i < n[0]; ++i) {
          const std::size_t c = grid_.index(i, j, k);
          const int pos = a == 0 ? i : (a == 1 ? j : k);
          double v = 0.0;
          if (pos == 0 || pos == n[a] - 1) {
            v = end_diag_[a] * x[c];
          } else {
            v = mid_diag_[a] * x[c];
          }
          if (pos > 0) v += off_diag_[a] * x[c - s];
          if (pos < n[a] - 1) v += off_diag_[a] * x[c + s];
          y[c] += v;
        }
      }
    }
  }
}

}  // namespace npsim
