#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "npsim/grid.hpp"

namespace npsim {

/// Cell-centred scalar with one ghost value per boundary face.
///
/// Storage is a single array: interior cells first (grid order), then one
/// ghost per boundary face in Grid::boundary_faces() order. Ghost values are
/// only meaningful after a boundary closure has populated them.
class ScalarField {
 public:
  explicit ScalarField(const Grid& grid, double value = 0.0);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> interior() noexcept { return {data_.data(), grid_.cell_count()}; }
  std::span<const double> interior() const noexcept { return {data_.data(), grid_.cell_count()}; }
  std::span<double> ghosts() noexcept {
    return {data_.data() + grid_.cell_count(), grid_.boundary_face_count()};
  }
  std::span<const double> ghosts() const noexcept {
    return {data_.data() + grid_.cell_count(), grid_.boundary_face_count()};
  }
  std::span<const double> raw() const noexcept { return data_; }
  std::span<double> raw() noexcept { return data_; }

  double& operator[](std::size_t cell) noexcept { return data_[cell]; }
  double operator[](std::size_t cell) const noexcept { return data_[cell]; }

  bool ghosts_ready() const noexcept { return ghosts_ready_; }
  void set_ghosts_ready(bool ready) noexcept { ghosts_ready_ = ready; }

  /// Value across the (axis, side) face of `cell`: the neighbouring interior
  /// cell, or the ghost when the face is on the boundary.
  double neighbor(std::size_t cell, int axis, int side) const noexcept;
  /// Midpoint (ghost + interior)/2 on boundary face `bface`.
  double face_value(std::size_t bface) const noexcept;

  void fill(double value) noexcept;
  bool all_finite() const noexcept;

 private:
  Grid grid_;
  std::vector<double> data_;
  bool ghosts_ready_ = false;
};

/// Face-staggered (MAC) vector field: one normal component per face.
class StaggeredVectorField {
 public:
  explicit StaggeredVectorField(const Grid& grid);

  const Grid& grid() const noexcept { return grid_; }
  std::span<double> component(int axis) noexcept { return data_[axis]; }
  std::span<const double> component(int axis) const noexcept { return data_[axis]; }

  double& at(int axis, int i, int j, int k = 0) noexcept {
    return data_[axis][grid_.face_index(axis, i, j, k)];
  }
  double at(int axis, int i, int j, int k = 0) const noexcept {
    return data_[axis][grid_.face_index(axis, i, j, k)];
  }

  /// Zero every boundary normal component (no-slip / impermeable walls).
  void enforce_no_slip() noexcept;
  double max_boundary_normal() const noexcept;
  /// Discrete divergence per cell, (sum of outflow - inflow)/h.
  std::vector<double> divergence() const;
  double max_abs_divergence() const;
  void fill(double value) noexcept;
  bool all_finite() const noexcept;

 private:
  Grid grid_;
  std::array<std::vector<double>, 3> data_;
};

/// Sum over cells of f * cell volume.
double integrate_cells(const ScalarField& f);
double integrate_cells(const Grid& grid, std::span<const double> interior);

/// Sum over boundary faces of g * face area; one value per boundary face.
double integrate_boundary(const Grid& grid, std::span<const double> per_face);

/// Face-difference approximation of the integral of |grad f|^2.
///
/// Interior faces carry a full control volume h*A. A boundary face pairs the
/// interior cell with its ghost over the same distance h but only half the
/// control volume, since the segment from the cell centre to the wall is half
/// a cell. Throws if the ghost layer is not populated.
double gradient_squared_norm(const ScalarField& f);

/// Populate ghosts so the face midpoint equals `face_values[b]`:
/// ghost = 2*face_value - interior. Used for Dirichlet closures and tests.
void fill_dirichlet_ghosts(ScalarField& f, std::span<const double> face_values);
/// Homogeneous Neumann closure: ghost = interior.
void fill_neumann_ghosts(ScalarField& f);

}  // namespace npsim
