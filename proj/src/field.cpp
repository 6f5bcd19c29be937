#include "pks/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pks {

Grid::Grid(std::size_t nx_, std::size_t ny_, double h_) : Grid(nx_, ny_, 1, h_) {}

Grid::Grid(std::size_t nx_, std::size_t ny_, std::size_t nz_, double h_)
    : nx(nx_), ny(ny_), nz(nz_), h(h_) {
  if (nx == 0 || ny == 0 || nz == 0) throw std::invalid_argument("Grid: zero dimension");
  if (!(h > 0.0)) throw std::invalid_argument("Grid: spacing must be positive");
}

double Grid::cell_volume() const { return dim() == 3 ? h * h * h : h * h; }

std::array<double, 3> Grid::extents() const {
  return {static_cast<double>(nx) * h, static_cast<double>(ny) * h,
          dim() == 3 ? static_cast<double>(nz) * h : 0.0};
}

std::array<double, 3> Grid::center(std::size_t i, std::size_t j, std::size_t k) const {
  return {origin[0] + (static_cast<double>(i) + 0.5) * h,
          origin[1] + (static_cast<double>(j) + 0.5) * h,
          dim() == 3 ? origin[2] + (static_cast<double>(k) + 0.5) * h : 0.0};
}

double compensated_sum(std::span<const double> xs) {
  double sum = 0.0;
  double c = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

double integrate(const ScalarField& f) { return f.grid.cell_volume() * compensated_sum(f.values); }

double l2_dot(const ScalarField& a, const ScalarField& b) {
  std::vector<double> prod(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) prod[n] = a[n] * b[n];
  return a.grid.cell_volume() * compensated_sum(prod);
}

double l2_norm(const ScalarField& a) { return std::sqrt(l2_dot(a, a)); }

double l2_distance(const ScalarField& a, const ScalarField& b) {
  std::vector<double> sq(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) sq[n] = (a[n] - b[n]) * (a[n] - b[n]);
  return std::sqrt(a.grid.cell_volume() * compensated_sum(sq));
}

double max_abs_difference(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a[n] - b[n]));
  return m;
}

namespace {

// Calls fn(n, stride, count, idx) for each axis of each cell.
template <class Fn>
void for_each_axis(const Grid& g, Fn&& fn) {
  const std::size_t strides[3] = {1, g.nx, g.nx * g.ny};
  const std::size_t counts[3] = {g.nx, g.ny, g.nz};
  const int d = g.dim();
  for (std::size_t k = 0; k < g.nz; ++k) {
    for (std::size_t j = 0; j < g.ny; ++j) {
      for (std::size_t i = 0; i < g.nx; ++i) {
        const std::size_t n = g.index(i, j, k);
        const std::size_t pos[3] = {i, j, k};
        for (int ax = 0; ax < d; ++ax) fn(n, strides[ax], counts[ax], pos[ax]);
      }
    }
  }
}

}  // namespace

void apply_neg_laplacian(const ScalarField& u, ScalarField& out) {
  const Grid& g = u.grid;
  out.grid = g;
  out.values.assign(g.size(), 0.0);
  const double inv_h2 = 1.0 / (g.h * g.h);
  for_each_axis(g, [&](std::size_t n, std::size_t stride, std::size_t count, std::size_t pos) {
    double acc = 0.0;
    if (pos > 0) acc += u[n] - u[n - stride];
    if (pos + 1 < count) acc += u[n] - u[n + stride];
    out[n] += acc * inv_h2;
  });
}

ScalarField gradient_norm_squared(const ScalarField& u) {
  ScalarField out(u.grid, 0.0);
  const double inv_h = 1.0 / u.grid.h;
  for_each_axis(u.grid,
                [&](std::size_t n, std::size_t stride, std::size_t count, std::size_t pos) {
                  double acc = 0.0;
                  if (pos > 0) {
                    const double d = (u[n] - u[n - stride]) * inv_h;
                    acc += d * d;
                  }
                  if (pos + 1 < count) {
                    const double d = (u[n + stride] - u[n]) * inv_h;
                    acc += d * d;
                  }
                  out[n] += 0.5 * acc;
                });
  return out;
}

ScalarField centered_gradient_norm(const ScalarField& u) {
  ScalarField out(u.grid, 0.0);
  const double inv_2h = 0.5 / u.grid.h;
  for_each_axis(u.grid,
                [&](std::size_t n, std::size_t stride, std::size_t count, std::size_t pos) {
                  const double hi = pos + 1 < count ? u[n + stride] : u[n];
                  const double lo = pos > 0 ? u[n - stride] : u[n];
                  const double d = (hi - lo) * inv_2h;
                  out[n] += d * d;
                });
  for (double& v : out.values) v = std::sqrt(v);
  return out;
}

double dirichlet_energy(const ScalarField& u) { return 0.5 * integrate(gradient_norm_squared(u)); }

}  // namespace pks
