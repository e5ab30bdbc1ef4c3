#include "npsim/grid.hpp"

#include <cmath>
#include <string>

#include "npsim/errors.hpp"

namespace npsim {

Grid::Grid(int dim, std::array<int, 3> cells, std::array<double, 3> lengths)
    : dim_(dim), cells_(cells), lengths_(lengths) {
  if (dim_ != 2 && dim_ != 3) {
    throw ConfigError("grid dimension must be 2 or 3, got " + std::to_string(dim_), "grid.dim");
  }
  for (int a = 0; a < dim_; ++a) {
    if (cells_[a] < 2) {
      throw ConfigError("grid needs at least 2 cells per axis (axis " + std::to_string(a) + ")",
                        "grid.cells");
    }
    if (!(lengths_[a] > 0.0) || !std::isfinite(lengths_[a])) {
      throw ConfigError("grid lengths must be positive and finite (axis " + std::to_string(a) + ")",
                        "grid.lengths");
    }
  }
  if (dim_ == 2) {
    cells_[2] = 1;
    lengths_[2] = 1.0;
  }
  cell_volume_ = 1.0;
  for (int a = 0; a < 3; ++a) {
    spacing_[a] = lengths_[a] / cells_[a];
    if (a < dim_) cell_volume_ *= spacing_[a];
  }
  stride_ = {1, static_cast<std::size_t>(cells_[0]),
             static_cast<std::size_t>(cells_[0]) * static_cast<std::size_t>(cells_[1])};
  cell_count_ = stride_[2] * static_cast<std::size_t>(cells_[2]);
  for (int axis = 0; axis < 3; ++axis) {
    std::size_t st = 1;
    for (int a = 0; a < 3; ++a) {
      face_stride_[axis][a] = st;
      st *= static_cast<std::size_t>(a == axis ? cells_[a] + 1 : cells_[a]);
    }
  }

  auto faces = std::make_shared<std::vector<BoundaryFace>>();
  for (int a = 0; a < dim_; ++a) {
    for (int s = 0; s < 2; ++s) {
      boundary_offset_[a][s] = faces->size();
      const int side = s == 0 ? -1 : 1;
      const int fixed = s == 0 ? 0 : cells_[a] - 1;
      for (std::size_t c = 0; c < cell_count_; ++c) {
        auto ijk = coords(c);
        if (ijk[a] != fixed) continue;
        auto center = cell_center(c);
        center[a] = s == 0 ? 0.0 : lengths_[a];
        faces->push_back({c, a, side, face_area(a), center});
      }
    }
  }
  boundary_ = std::move(faces);
}

double Grid::total_volume() const noexcept {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= lengths_[a];
  return v;
}

double Grid::boundary_measure() const noexcept {
  double total = 0.0;
  for (int a = 0; a < dim_; ++a) {
    double area = 1.0;
    for (int b = 0; b < dim_; ++b) {
      if (b != a) area *= lengths_[b];
    }
    total += 2.0 * area;
  }
  return total;
}

std::array<double, 3> Grid::cell_center(std::size_t idx) const noexcept {
  const auto ijk = coords(idx);
  std::array<double, 3> x{};
  for (int a = 0; a < 3; ++a) x[a] = (ijk[a] + 0.5) * spacing_[a];
  if (dim_ == 2) x[2] = 0.0;
  return x;
}

std::size_t Grid::boundary_face_index(std::size_t cell, int axis, int side) const noexcept {
  const auto ijk = coords(cell);
  std::size_t slab = 0;
  switch (axis) {
    case 0:
      slab = static_cast<std::size_t>(ijk[1]) + static_cast<std::size_t>(cells_[1]) * ijk[2];
      break;
    case 1:
      slab = static_cast<std::size_t>(ijk[0]) + static_cast<std::size_t>(cells_[0]) * ijk[2];
      break;
    default:
      slab = static_cast<std::size_t>(ijk[0]) + static_cast<std::size_t>(cells_[0]) * ijk[1];
      break;
  }
  return boundary_offset_[axis][side < 0 ? 0 : 1] + slab;
}

std::size_t Grid::face_count(int axis) const noexcept {
  std::size_t n = 1;
  for (int a = 0; a < 3; ++a) {
    n *= static_cast<std::size_t>(a == axis ? cells_[a] + 1 : cells_[a]);
  }
  return n;
}

bool Grid::same_shape(const Grid& other) const noexcept {
  return dim_ == other.dim_ && cells_ == other.cells_ && lengths_ == other.lengths_;
}

Grid make_grid(int dim, std::span<const int> cells, std::span<const double> lengths) {
  if (dim != 2 && dim != 3) {
    throw ConfigError("grid dimension must be 2 or 3, got " + std::to_string(dim), "grid.dim");
  }
  if (cells.size() < static_cast<std::size_t>(dim) || lengths.size() < static_cast<std::size_t>(dim)) {
    throw ConfigError("grid cells/lengths need one entry per axis", "grid");
  }
  std::array<int, 3> n{1, 1, 1};
  std::array<double, 3> l{1.0, 1.0, 1.0};
  for (int a = 0; a < dim; ++a) {
    n[a] = cells[a];
    l[a] = lengths[a];
  }
  return Grid(dim, n, l);
}

}  // namespace npsim
