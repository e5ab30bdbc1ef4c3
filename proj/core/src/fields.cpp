#include "npsim/fields.hpp"

#include <algorithm>
#include <cmath>

#include "npsim/errors.hpp"

namespace npsim {

ScalarField::ScalarField(const Grid& grid, double value)
    : grid_(grid), data_(grid.cell_count() + grid.boundary_face_count(), value) {}

double ScalarField::neighbor(std::size_t cell, int axis, int side) const noexcept {
  if (grid_.on_boundary(cell, axis, side)) {
    return data_[grid_.cell_count() + grid_.boundary_face_index(cell, axis, side)];
  }
  return side < 0 ? data_[cell - grid_.stride(axis)] : data_[cell + grid_.stride(axis)];
}

double ScalarField::face_value(std::size_t bface) const noexcept {
  const auto& f = grid_.boundary_faces()[bface];
  return 0.5 * (data_[f.cell] + data_[grid_.cell_count() + bface]);
}

void ScalarField::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

bool ScalarField::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

StaggeredVectorField::StaggeredVectorField(const Grid& grid) : grid_(grid) {
  for (int a = 0; a < 3; ++a) {
    data_[a].assign(a < grid.dim() ? grid.face_count(a) : 0, 0.0);
  }
}

void StaggeredVectorField::enforce_no_slip() noexcept {
  const auto& n = grid_.cells();
  for (int a = 0; a < grid_.dim(); ++a) {
    std::array<int, 3> hi = n;
    hi[a] = 1;
    for (int k = 0; k < hi[2]; ++k) {
      for (int j = 0; j < hi[1]; ++j) {
        for (int i = 0; i < hi[0]; ++i) {
          std::array<int, 3> lo_face{i, j, k};
          std::array<int, 3> hi_face{i, j, k};
          hi_face[a] = n[a];
          data_[a][grid_.face_index(a, lo_face[0], lo_face[1], lo_face[2])] = 0.0;
          data_[a][grid_.face_index(a, hi_face[0], hi_face[1], hi_face[2])] = 0.0;
        }
      }
    }
  }
}

double StaggeredVectorField::max_boundary_normal() const noexcept {
  double m = 0.0;
  const auto& n = grid_.cells();
  for (int a = 0; a < grid_.dim(); ++a) {
    for (std::size_t c = 0; c < grid_.cell_count(); ++c) {
      auto ijk = grid_.coords(c);
      if (ijk[a] == 0) m = std::max(m, std::abs(data_[a][grid_.face_index(a, ijk[0], ijk[1], ijk[2])]));
      if (ijk[a] == n[a] - 1) {
        ijk[a] += 1;
        m = std::max(m, std::abs(data_[a][grid_.face_index(a, ijk[0], ijk[1], ijk[2])]));
      }
    }
  }
  return m;
}

std::vector<double> StaggeredVectorField::divergence() const {
  std::vector<double> div(grid_.cell_count(), 0.0);
  for (std::size_t c = 0; c < grid_.cell_count(); ++c) {
    const auto ijk = grid_.coords(c);
    double d = 0.0;
    for (int a = 0; a < grid_.dim(); ++a) {
      const std::size_t lo = grid_.face_index(a, ijk[0], ijk[1], ijk[2]);
      const std::size_t hi = lo + grid_.face_stride(a, a);
      d += (data_[a][hi] - data_[a][lo]) / grid_.spacing(a);
    }
    div[c] = d;
  }
  return div;
}

double StaggeredVectorField::max_abs_divergence() const {
  double m = 0.0;
  for (double d : divergence()) m = std::max(m, std::abs(d));
  return m;
}

void StaggeredVectorField::fill(double value) noexcept {
  for (auto& comp : data_) std::fill(comp.begin(), comp.end(), value);
}

bool StaggeredVectorField::all_finite() const noexcept {
  for (const auto& comp : data_) {
    if (!std::all_of(comp.begin(), comp.end(), [](double v) { return std::isfinite(v); })) return false;
  }
  return true;
}

double integrate_cells(const Grid& grid, std::span<const double> interior) {
  double sum = 0.0;
  for (std::size_t c = 0; c < grid.cell_count(); ++c) sum += interior[c];
  return sum * grid.cell_volume();
}

double integrate_cells(const ScalarField& f) { return integrate_cells(f.grid(), f.interior()); }

double integrate_boundary(const Grid& grid, std::span<const double> per_face) {
  if (per_face.size() != grid.boundary_face_count()) {
    throw ConfigError("integrate_boundary needs one value per boundary face");
  }
  const auto faces = grid.boundary_faces();
  double sum = 0.0;
  for (std::size_t b = 0; b < faces.size(); ++b) sum += per_face[b] * faces[b].area;
  return sum;
}

double gradient_squared_norm(const ScalarField& f) {
  if (!f.ghosts_ready()) {
    throw InvariantViolation("core_fields", "gradient_squared_norm: ghost layer not populated");
  }
  const Grid& g = f.grid();
  const double vol = g.cell_volume();
  double sum = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    const double inv_h = 1.0 / g.spacing(a);
    const std::size_t s = g.stride(a);
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      if (g.on_boundary(c, a, +1)) continue;
      const double d = (f[c + s] - f[c]) * inv_h;
      sum += d * d;
    }
  }
  sum *= vol;
  double boundary = 0.0;
  const auto faces = g.boundary_faces();
  const auto ghosts = f.ghosts();
  for (std::size_t b = 0; b < faces.size(); ++b) {
    const double d = (ghosts[b] - f[faces[b].cell]) / g.spacing(faces[b].axis);
    boundary += d * d;
  }
  return sum + 0.5 * vol * boundary;
}

void fill_dirichlet_ghosts(ScalarField& f, std::span<const double> face_values) {
  const auto faces = f.grid().boundary_faces();
  auto ghosts = f.ghosts();
  for (std::size_t b = 0; b < faces.size(); ++b) ghosts[b] = 2.0 * face_values[b] - f[faces[b].cell];
  f.set_ghosts_ready(true);
}

void fill_neumann_ghosts(ScalarField& f) {
  const auto faces = f.grid().boundary_faces();
  auto ghosts = f.ghosts();
  for (std::size_t b = 0; b < faces.size(); ++b) ghosts[b] = f[faces[b].cell];
  f.set_ghosts_ready(true);
}

}  // namespace npsim
