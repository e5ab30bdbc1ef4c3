#include <doctest.h>

#include <array>
#include <set>
#include <tuple>

#include "npsim/errors.hpp"
#include "npsim/fields.hpp"
#include "npsim/grid.hpp"
#include "npsim/poisson.hpp"
#include "support.hpp"

using namespace npsim;
using doctest::Approx;

TEST_SUITE("core_fields") {
  TEST_CASE("grid arithmetic") {
    const Grid a(2, {4, 4, 1}, {1.0, 1.0, 1.0});
    CHECK(a.spacing(0) == 0.25);
    CHECK(a.spacing(1) == 0.25);
    CHECK(a.cell_count() == 16);
    CHECK(a.boundary_face_count() == 16);

    const Grid b(3, {2, 2, 2}, {1.0, 2.0, 4.0});
    CHECK(b.spacing(0) == 0.5);
    CHECK(b.spacing(1) == 1.0);
    CHECK(b.spacing(2) == 2.0);
    CHECK(b.cell_count() == 8);
    CHECK(b.boundary_face_count() == 24);

    const Grid c(2, {64, 32, 1}, {2.0, 1.0, 1.0});
    CHECK(c.spacing(0) == 0.03125);
    CHECK(c.spacing(1) == 0.03125);
    CHECK(c.cell_volume() == 9.765625e-4);
  }

  TEST_CASE("grid validation") {
    const std::array<int, 3> n{4, 4, 4};
    const std::array<double, 3> L{1.0, 1.0, 1.0};
    CHECK_THROWS_AS(make_grid(1, n, L), ConfigError);
    CHECK_THROWS_AS(make_grid(4, n, L), ConfigError);
    const std::array<int, 3> small{4, 1, 4};
    CHECK_THROWS_AS(make_grid(2, small, L), ConfigError);
    const std::array<double, 3> flat{1.0, 0.0, 1.0};
    CHECK_THROWS_AS(make_grid(2, n, flat), ConfigError);
    const std::array<double, 3> negative{-1.0, 1.0, 1.0};
    CHECK_THROWS_AS(make_grid(3, n, negative), ConfigError);
  }

  TEST_CASE("boundary faces are enumerated once with outward normals") {
    for (const Grid& g : {Grid(2, {5, 3, 1}, {1.0, 0.6, 1.0}), Grid(3, {3, 4, 2}, {1.0, 2.0, 4.0})}) {
      std::set<std::tuple<std::size_t, int, int>> seen;
      const auto faces = g.boundary_faces();
      double area = 0.0;
      for (std::size_t b = 0; b < faces.size(); ++b) {
        const auto& f = faces[b];
        CHECK(g.on_boundary(f.cell, f.axis, f.side));
        CHECK(g.boundary_face_index(f.cell, f.axis, f.side) == b);
        CHECK(seen.insert({f.cell, f.axis, f.side}).second);
        const auto x = g.cell_center(f.cell);
        CHECK(f.center[f.axis] == Approx(x[f.axis] + f.side * 0.5 * g.spacing(f.axis)));
        area += f.area;
      }
      CHECK(area == Approx(g.boundary_measure()).epsilon(1e-14));
    }
    CHECK(integrate_boundary(test::square(8), std::vector<double>(32, 1.0)) == 4.0);
    const Grid cube(3, {4, 4, 4}, {1.0, 1.0, 1.0});
    CHECK(integrate_boundary(cube, std::vector<double>(cube.boundary_face_count(), 1.0)) == 6.0);
    CHECK(integrate_boundary(cube, std::vector<double>(cube.boundary_face_count(), 0.0)) == 0.0);
    const Grid box(3, {2, 2, 2}, {1.0, 2.0, 4.0});
    CHECK(integrate_boundary(box, std::vector<double>(24, 1.0)) == 28.0);
  }

  TEST_CASE("integrate_cells") {
    const Grid g = test::square(4);
    CHECK(integrate_cells(ScalarField(g, 1.0)) == 1.0);
    CHECK(integrate_cells(ScalarField(g, 0.0)) == 0.0);
    ScalarField one(g, 0.0);
    one[5] = 1.0;
    CHECK(integrate_cells(one) == 0.0625);
  }

  TEST_CASE("integrate_cells is linear") {
    const Grid g(2, {13, 7, 1}, {1.3, 0.7, 1.0});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto f = test::random_values(g.cell_count(), seed);
      const auto h = test::random_values(g.cell_count(), seed + 100);
      const double alpha = 0.3 + seed;
      const double beta = -1.7 + 0.1 * seed;
      std::vector<double> mix(f.size());
      for (std::size_t i = 0; i < f.size(); ++i) mix[i] = alpha * f[i] + beta * h[i];
      const double lhs = integrate_cells(g, mix);
      const double rhs = alpha * integrate_cells(g, f) + beta * integrate_cells(g, h);
      CHECK(std::abs(lhs - rhs) <= 1e-14 * (1.0 + std::abs(alpha) + std::abs(beta)));
    }
  }

  TEST_CASE("gradient_squared_norm") {
    const Grid g = test::square(6);
    ScalarField c(g, 2.5);
    CHECK_THROWS_AS(gradient_squared_norm(c), InvariantViolation);
    fill_neumann_ghosts(c);
    CHECK(gradient_squared_norm(c) == 0.0);

    // f = x with Dirichlet-consistent ghosts on a 1D-like grid.
    const Grid line(2, {64, 2, 1}, {1.0, 1.0, 1.0});
    ScalarField f(line);
    for (std::size_t i = 0; i < line.cell_count(); ++i) f[i] = line.cell_center(i)[0];
    std::vector<double> face;
    for (const auto& b : line.boundary_faces()) face.push_back(b.center[0]);
    fill_dirichlet_ghosts(f, face);
    CHECK(gradient_squared_norm(f) == Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("gradient_squared_norm matches a hand sum over every face") {
    const Grid g(2, {3, 3, 1}, {1.0, 1.5, 1.0});
    ScalarField f(g);
    test::randomize(f.interior(), 3, -1.0, 1.0);
    test::randomize(f.ghosts(), 4, -1.0, 1.0);
    f.set_ghosts_ready(true);
    const double hx = g.spacing(0);
    const double hy = g.spacing(1);
    const double vol = hx * hy;
    auto at = [&](int i, int j) { return f[static_cast<std::size_t>(i + 3 * j)]; };
    double sum = 0.0;
    for (int j = 0; j < 3; ++j) {
      for (int i = 0; i < 2; ++i) sum += std::pow((at(i + 1, j) - at(i, j)) / hx, 2) * vol;
    }
    for (int j = 0; j < 2; ++j) {
      for (int i = 0; i < 3; ++i) sum += std::pow((at(i, j + 1) - at(i, j)) / hy, 2) * vol;
    }
    const auto faces = g.boundary_faces();
    for (std::size_t b = 0; b < faces.size(); ++b) {
      const double h = g.spacing(faces[b].axis);
      sum += std::pow((f.ghosts()[b] - f[faces[b].cell]) / h, 2) * 0.5 * vol;
    }
    CHECK(gradient_squared_norm(f) == Approx(sum).epsilon(1e-14));
  }

  TEST_CASE("ghost fills never touch the interior") {
    const Grid g(3, {4, 3, 5}, {1.0, 0.5, 2.0});
    ScalarField f(g);
    test::randomize(f.interior(), 9, 0.0, 2.0);
    const std::vector<double> before(f.interior().begin(), f.interior().end());
    const auto xi = test::random_values(g.boundary_face_count(), 10);
    fill_neumann_ghosts(f);
    fill_dirichlet_ghosts(f, xi);
    fill_robin_ghosts(f, xi, 0.7);
    CHECK(std::equal(before.begin(), before.end(), f.interior().begin()));
    for (std::size_t b = 0; b < g.boundary_face_count(); ++b) {
      const double h = g.spacing(g.boundary_faces()[b].axis);
      const double c = f[g.boundary_faces()[b].cell];
      const double ghost = f.ghosts()[b];
      CHECK((ghost - c) / h + 0.7 * (ghost + c) / 2.0 == Approx(xi[b]).epsilon(1e-12));
    }
  }

  TEST_CASE("staggered field divergence and no-slip") {
    const Grid g = test::square(5);
    StaggeredVectorField u(g);
    u.fill(1.0);
    CHECK(u.max_boundary_normal() == 1.0);
    u.enforce_no_slip();
    CHECK(u.max_boundary_normal() == 0.0);
    StaggeredVectorField v(g);
    v.at(0, 2, 2) = 1.0;
    const auto div = v.divergence();
    const double h = g.spacing(0);
    CHECK(div[g.index(1, 2)] == Approx(1.0 / h));
    CHECK(div[g.index(2, 2)] == Approx(-1.0 / h));
    double total = 0.0;
    for (double d : div) total += d;
    CHECK(total == Approx(0.0));
  }
}
