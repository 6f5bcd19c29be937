#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace pks {

/// Uniform cell-centered grid on the box origin + [0, n_x h] x [0, n_y h] (x [0, n_z h]).
/// A grid with nz == 1 is two-dimensional.
struct Grid {
  std::size_t nx = 1;
  std::size_t ny = 1;
  std::size_t nz = 1;
  double h = 1.0;
  std::array<double, 3> origin{0.0, 0.0, 0.0};

  Grid() = default;
  Grid(std::size_t nx_, std::size_t ny_, double h_);
  Grid(std::size_t nx_, std::size_t ny_, std::size_t nz_, double h_);

  int dim() const { return nz > 1 ? 3 : 2; }
  std::size_t size() const { return nx * ny * nz; }
  double cell_volume() const;
  double volume() const { return cell_volume() * static_cast<double>(size()); }
  std::array<double, 3> extents() const;

  /// Row-major, x fastest.
  std::size_t index(std::size_t i, std::size_t j, std::size_t k = 0) const {
    return i + nx * (j + ny * k);
  }
  std::array<double, 3> center(std::size_t i, std::size_t j, std::size_t k = 0) const;

  bool operator==(const Grid&) const = default;
};

/// Cell-centered values on a Grid with homogeneous Neumann boundary semantics.
struct ScalarField {
  Grid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t n) { return values[n]; }
  double operator[](std::size_t n) const { return values[n]; }
  std::span<const double> span() const { return values; }
};

/// Neumaier-compensated sum in index order. Used for every grid reduction so
/// results do not depend on how the per-cell work was produced.
double compensated_sum(std::span<const double> xs);

/// Midpoint-rule integral h^d * sum(values).
double integrate(const ScalarField& f);

/// Discrete L2 inner product and norm with weight h^d.
double l2_dot(const ScalarField& a, const ScalarField& b);
double l2_norm(const ScalarField& a);
double l2_distance(const ScalarField& a, const ScalarField& b);
double max_abs_difference(const ScalarField& a, const ScalarField& b);

/// -Delta_h u with mirrored ghost cells (5-point in 2D, 7-point in 3D).
void apply_neg_laplacian(const ScalarField& u, ScalarField& out);

/// Per-cell squared gradient: for each axis, the mean of the squared forward and
/// backward face differences, with zero flux through the boundary faces. Summed
/// with weight h^d it equals the Dirichlet form <u, -Delta_h u> exactly.
ScalarField gradient_norm_squared(const ScalarField& u);

/// Per-cell |grad u| from centered differences with mirrored ghost cells.
ScalarField centered_gradient_norm(const ScalarField& u);

/// Discrete Dirichlet energy (1/2) sum_faces |D u|^2 h^d.
double dirichlet_energy(const ScalarField& u);

}  // namespace pks
