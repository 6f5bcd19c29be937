#include "pks/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pks {

EnergyPair energy_J(const ScalarField& phi, const ScalarField& rho, double ell, double eps,
                    const PotentialParams& p, double target_mass, double mass_tol) {
  (void)ell;  // rho already encodes it; kept in the signature for callers that pair them
  const double mass = integrate(rho);
  if (std::abs(mass - target_mass) > mass_tol) {
    std::ostringstream msg;
    msg << "energy_J: density mass " << mass << " inconsistent with target " << target_mass;
    throw std::domain_error(msg.str());
  }
  const std::size_t n = phi.size();
  std::vector<double> squared(n);
  std::vector<double> conjugate(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rho[i];
    const double f = phi[i];
    squared[i] = w_eval(r, p) + 0.5 * (r - f) * (r - f);
    conjugate[i] = (g_eval(r, p) + g_star(f, p) - r * f) + wbar_eval(f, p);
  }
  const double hd = phi.grid.cell_volume();
  const double gradient = eps * dirichlet_energy(phi);
  return {hd * compensated_sum(squared) / eps + gradient,
          hd * compensated_sum(conjugate) / eps + gradient};
}

ScalarField energy_measure_density(const ScalarField& phi, double eps, const PotentialParams& p) {
  ScalarField out = gradient_norm_squared(phi);
  const double inv_gamma = 1.0 / p.gamma();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = inv_gamma * (wbar_eval(phi[i], p) / eps + 0.5 * eps * out[i]);
  }
  return out;
}

double modica_mortola_energy(const ScalarField& phi, double eps, const PotentialParams& p) {
  return p.gamma() * integrate(energy_measure_density(phi, eps, p));
}

ScalarField forcing_field(const ScalarField& phi, double ell, double eps,
                          const PotentialParams& p) {
  ScalarField out(phi.grid, 0.0);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    out[i] = (g_star_prime(phi[i] + ell, p) - g_star_prime(phi[i], p)) / eps;
  }
  return out;
}

double forcing_l2_rate(const ScalarField& forcing, double eps) {
  return l2_dot(forcing, forcing) / eps;
}

double forcing_l2_accum(std::span<const ScalarField> forcing_series, std::span<const double> dts,
                        double eps) {
  if (forcing_series.size() != dts.size()) {
    throw std::invalid_argument("forcing_l2_accum: series and time steps differ in length");
  }
  std::vector<double> terms(dts.size());
  for (std::size_t n = 0; n < dts.size(); ++n) {
    terms[n] = dts[n] * forcing_l2_rate(forcing_series[n], eps);
  }
  return compensated_sum(terms);
}

bool forcing_is_localized(const ScalarField& phi, const ScalarField& forcing, double ell,
                          const PotentialParams& p) {
  const double half = 0.5 * p.delta();
  if (!(std::abs(ell) < half)) return true;  // no claim outside this regime
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const bool near_well = phi[i] < half || phi[i] > 1.0 - half;
    if (near_well && forcing[i] != 0.0) return false;
  }
  return true;
}

namespace {

boost::math::interpolators::pchip<std::vector<double>> make_truncation(const PotentialParams& p,
                                                                       std::size_t nodes) {
  if (nodes < 4) throw std::invalid_argument("TruncationTable: need at least 4 nodes");
  std::vector<double> x(nodes);
  std::vector<double> y(nodes);
  const double inv_gamma = 1.0 / p.gamma();
  double acc = 0.0;
  for (std::size_t k = 0; k < nodes; ++k) {
    x[k] = static_cast<double>(k) / static_cast<double>(nodes - 1);
    if (k > 0) acc += integrate_wbar_root(x[k - 1], x[k], p);
    y[k] = acc * inv_gamma;
  }
  x.back() = 1.0;
  return boost::math::interpolators::pchip<std::vector<double>>(std::move(x), std::move(y));
}

}  // namespace

TruncationTable::TruncationTable(const PotentialParams& p, std::size_t nodes)
    : interp_(make_truncation(p, nodes)) {}

double TruncationTable::operator()(double v) const {
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  return std::clamp(interp_(v), 0.0, 1.0);
}

ScalarField truncation_psi(const ScalarField& phi, const TruncationTable& table) {
  ScalarField out(phi.grid, 0.0);
  for (std::size_t i = 0; i < phi.size(); ++i) out[i] = table(phi[i]);
  return out;
}

ScalarField truncation_psi(const ScalarField& phi, const PotentialParams& p) {
  return truncation_psi(phi, TruncationTable(p));
}

double bv_seminorm(const ScalarField& psi) {
  return integrate(centered_gradient_norm(psi));
}

double contour_length(const ScalarField& phi, double level) {
  const Grid& g = phi.grid;
  if (g.dim() != 2 || g.nx < 2 || g.ny < 2) return 0.0;
  const double h = g.h;
  std::vector<double> segments;
  for (std::size_t j = 0; j + 1 < g.ny; ++j) {
    for (std::size_t i = 0; i + 1 < g.nx; ++i) {
      // Corners counterclockwise from bottom-left, in local coordinates of the cell.
      const double v[4] = {phi[g.index(i, j)], phi[g.index(i + 1, j)],
                           phi[g.index(i + 1, j + 1)], phi[g.index(i, j + 1)]};
      const double cx[4] = {0.0, h, h, 0.0};
      const double cy[4] = {0.0, 0.0, h, h};
      bool inside[4];
      int count = 0;
      for (int c = 0; c < 4; ++c) {
        inside[c] = v[c] > level;
        count += inside[c] ? 1 : 0;
      }
      if (count == 0 || count == 4) continue;
      // Crossing point on edge e joining corners e and e+1.
      double ex[4] = {};
      double ey[4] = {};
      bool crossed[4];
      for (int e = 0; e < 4; ++e) {
        const int a = e;
        const int b = (e + 1) % 4;
        crossed[e] = inside[a] != inside[b];
        if (crossed[e]) {
          const double s = (level - v[a]) / (v[b] - v[a]);
          ex[e] = cx[a] + s * (cx[b] - cx[a]);
          ey[e] = cy[a] + s * (cy[b] - cy[a]);
        }
      }
      auto seg = [&](int e0, int e1) {
        segments.push_back(std::hypot(ex[e0] - ex[e1], ey[e0] - ey[e1]));
      };
      const bool saddle = count == 2 && inside[0] == inside[2];
      if (!saddle) {
        int first = -1;
        for (int e = 0; e < 4; ++e) {
          if (!crossed[e]) continue;
          if (first < 0) {
            first = e;
          } else {
            seg(first, e);
          }
        }
        continue;
      }
      // Saddle: cut off the corners whose state differs from the cell average.
      const bool center_inside = 0.25 * (v[0] + v[1] + v[2] + v[3]) > level;
      for (int c = 0; c < 4; ++c) {
        if (inside[c] != center_inside) seg((c + 3) % 4, c);
      }
    }
  }
  return compensated_sum(segments);
}

InterfaceGeometry interface_geometry(const ScalarField& phi) {
  InterfaceGeometry out;
  std::size_t count = 0;
  for (double v : phi.values) count += v > 0.5 ? 1 : 0;
  out.area_over_half = static_cast<double>(count) * phi.grid.cell_volume();
  if (phi.grid.dim() == 2) {
    out.perimeter = contour_length(phi, 0.5);
    out.radius = std::sqrt(out.area_over_half / std::numbers::pi);
  } else {
    out.perimeter = bv_seminorm(phi);
    out.radius = std::cbrt(3.0 * out.area_over_half / (4.0 * std::numbers::pi));
  }
  return out;
}

std::vector<double> component_volumes(const ScalarField& phi, double level) {
  const Grid& g = phi.grid;
  std::vector<int> label(g.size(), -1);
  std::vector<double> volumes;
  std::deque<std::size_t> queue;
  const std::size_t strides[3] = {1, g.nx, g.nx * g.ny};
  const std::size_t counts[3] = {g.nx, g.ny, g.nz};
  for (std::size_t seed = 0; seed < g.size(); ++seed) {
    if (label[seed] >= 0 || !(phi[seed] > level)) continue;
    const int id = static_cast<int>(volumes.size());
    std::size_t cells = 0;
    label[seed] = id;
    queue.push_back(seed);
    while (!queue.empty()) {
      const std::size_t n = queue.front();
      queue.pop_front();
      ++cells;
      const std::size_t pos[3] = {n % g.nx, (n / g.nx) % g.ny, n / (g.nx * g.ny)};
      for (int ax = 0; ax < g.dim(); ++ax) {
        for (int dir : {-1, 1}) {
          if (dir < 0 && pos[ax] == 0) continue;
          if (dir > 0 && pos[ax] + 1 >= counts[ax]) continue;
          const std::size_t m = dir < 0 ? n - strides[ax] : n + strides[ax];
          if (label[m] >= 0 || !(phi[m] > level)) continue;
          label[m] = id;
          queue.push_back(m);
        }
      }
    }
    volumes.push_back(static_cast<double>(cells) * g.cell_volume());
  }
  std::sort(volumes.begin(), volumes.end(), std::greater<>());
  return volumes;
}

double transition_fraction(const ScalarField& phi, const PotentialParams& p) {
  const double half = 0.5 * p.delta();
  std::size_t count = 0;
  for (double v : phi.values) {
    if (std::min(std::abs(v), std::abs(v - 1.0)) > half) ++count;
  }
  return phi.size() == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(phi.size());
}

double dissipation_increment(const ScalarField& phi_old, const ScalarField& phi_new, double dt,
                             double eps) {
  const double d = l2_distance(phi_new, phi_old);
  return eps * d * d / dt;
}

double lambda_l2(std::span<const StepRecord> records, double t0, double t1) {
  std::vector<double> terms;
  for (const StepRecord& r : records) {
    if (r.t > t0 && r.t <= t1) terms.push_back(r.dt * r.lambda * r.lambda);
  }
  return compensated_sum(terms);
}

double lambda_mean(std::span<const StepRecord> records, double t0, double t1) {
  std::vector<double> num;
  std::vector<double> den;
  for (const StepRecord& r : records) {
    if (r.t > t0 && r.t <= t1) {
      num.push_back(r.dt * r.lambda);
      den.push_back(r.dt);
    }
  }
  const double total = compensated_sum(den);
  return total > 0.0 ? compensated_sum(num) / total : 0.0;
}

}  // namespace pks
