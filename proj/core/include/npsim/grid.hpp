#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace npsim {

/// A face on the outer boundary of the box. `side` is -1 for the low face and
/// +1 for the high face along `axis`, so the outward normal is side * e_axis.
struct BoundaryFace {
  std::size_t cell;
  int axis;
  int side;
  double area;
  std::array<double, 3> center;
};

/// Uniform structured grid on the box [0,L1] x ... x [0,Ld], d in {2,3}.
///
/// Cells are numbered axis-major with x fastest: idx = i + n1*(j + n2*k).
/// In 2D the third axis is inert (one cell, unit spacing) and never enters
/// volumes or areas. Boundary faces are enumerated axis by axis, low side then
/// high side, each slab in increasing cell order.
///
/// Copies are cheap: the boundary face table is shared.
class Grid {
 public:
  Grid(int dim, std::array<int, 3> cells, std::array<double, 3> lengths);

  int dim() const noexcept { return dim_; }
  int cells(int axis) const noexcept { return cells_[axis]; }
  double length(int axis) const noexcept { return lengths_[axis]; }
  double spacing(int axis) const noexcept { return spacing_[axis]; }
  const std::array<int, 3>& cells() const noexcept { return cells_; }

  std::size_t cell_count() const noexcept { return cell_count_; }
  double cell_volume() const noexcept { return cell_volume_; }
  /// Area of a face normal to `axis` (a length in 2D).
  double face_area(int axis) const noexcept { return cell_volume_ / spacing_[axis]; }
  double total_volume() const noexcept;
  double boundary_measure() const noexcept;

  std::size_t stride(int axis) const noexcept { return stride_[axis]; }
  std::size_t index(int i, int j, int k = 0) const noexcept {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(cells_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(cells_[1]) * static_cast<std::size_t>(k));
  }
  std::array<int, 3> coords(std::size_t idx) const noexcept {
    const auto nx = static_cast<std::size_t>(cells_[0]);
    const auto ny = static_cast<std::size_t>(cells_[1]);
    return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny), static_cast<int>(idx / (nx * ny))};
  }
  std::array<double, 3> cell_center(std::size_t idx) const noexcept;

  std::span<const BoundaryFace> boundary_faces() const noexcept { return *boundary_; }
  std::size_t boundary_face_count() const noexcept { return boundary_->size(); }
  /// Index into boundary_faces() of the face of `cell` on (axis, side).
  /// Only meaningful when the cell touches that side.
  std::size_t boundary_face_index(std::size_t cell, int axis, int side) const noexcept;
  bool on_boundary(std::size_t cell, int axis, int side) const noexcept {
    const int c = coords(cell)[axis];
    return side < 0 ? c == 0 : c == cells_[axis] - 1;
  }

  /// Number of staggered faces normal to `axis`, boundary faces included.
  std::size_t face_count(int axis) const noexcept;
  /// Staggered face (i,j,k) normal to `axis`; the coordinate along `axis`
  /// runs over [0, n_axis], face c sits between cells c-1 and c.
  std::size_t face_index(int axis, int i, int j, int k = 0) const noexcept {
    const auto& s = face_stride_[axis];
    return static_cast<std::size_t>(i) * s[0] + static_cast<std::size_t>(j) * s[1] +
           static_cast<std::size_t>(k) * s[2];
  }
  std::size_t face_stride(int axis, int along) const noexcept { return face_stride_[axis][along]; }

  bool same_shape(const Grid& other) const noexcept;

 private:
  int dim_;
  std::array<int, 3> cells_;
  std::array<double, 3> lengths_;
  std::array<double, 3> spacing_;
  std::array<std::size_t, 3> stride_;
  std::array<std::array<std::size_t, 3>, 3> face_stride_{};
  std::size_t cell_count_;
  double cell_volume_;
  std::array<std::array<std::size_t, 2>, 3> boundary_offset_{};
  std::shared_ptr<const std::vector<BoundaryFace>> boundary_;
};

/// Validating constructor: dim in {2,3}, every n_a >= 2, every L_a > 0.
/// Only the first `dim` entries of the spans are read.
Grid make_grid(int dim, std::span<const int> cells, std::span<const double> lengths);

}  // namespace npsim
