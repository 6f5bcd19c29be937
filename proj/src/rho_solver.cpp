#include "pks/rho_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pks {

namespace {

// Neumaier summation of g*'(phi_i + ell) in index order.
double raw_mass(std::span<const double> phi, double ell, const PotentialParams& p) {
  double sum = 0.0;
  double c = 0.0;
  for (double v : phi) {
    const double x = g_star_prime(v + ell, p);
    const double t = sum + x;
    c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + c;
}

struct ActiveSet {
  std::size_t n_upper = 0;
  std::size_t n_band = 0;
  double band_offset_sum = 0.0;  // sum over band cells of (phi_i - lower)
};

ActiveSet classify(std::span<const double> phi, double ell, const PotentialParams& p) {
  ActiveSet s;
  std::vector<double> offsets;
  for (double v : phi) {
    const double x = v + ell;
    if (x >= p.upper()) {
      ++s.n_upper;
    } else if (x > p.lower()) {
      ++s.n_band;
      offsets.push_back(v - p.lower());
    }
  }
  s.band_offset_sum = compensated_sum(offsets);
  return s;
}

bool same_active_set(const ActiveSet& a, const ActiveSet& b) {
  return a.n_upper == b.n_upper && a.n_band == b.n_band;
}

}  // namespace

double mass_of_ell(const ScalarField& phi, double ell, const PotentialParams& p) {
  return phi.grid.cell_volume() * raw_mass(phi.values, ell, p);
}

MultiplierSolve solve_multiplier(const ScalarField& phi, double target_mass,
                                 const PotentialParams& p, double tol) {
  const double volume = phi.grid.volume();
  if (!(target_mass > 0.0 && target_mass < volume)) {
    std::ostringstream msg;
    msg << "solve_multiplier: target mass " << target_mass << " not in (0, |Omega| = " << volume
        << ")";
    throw InfeasibleMass(msg.str());
  }
  if (phi.values.empty()) throw InfeasibleMass("solve_multiplier: empty field");

  const auto [min_it, max_it] = std::minmax_element(phi.values.begin(), phi.values.end());
  double lo = p.lower() - *max_it - 1.0;
  double hi = p.upper() - *min_it + 1.0;
  const double hd = phi.grid.cell_volume();
  const double tol_mass = tol * target_mass;

  MultiplierSolve out;
  const double two_a = 2.0 * p.a();
  // Root of the linear piece of the mass function that contains `at`, if it has a slope.
  auto piece_root = [&](const ActiveSet& s) {
    return ((target_mass / hd - static_cast<double>(s.n_upper)) * two_a - s.band_offset_sum) /
           static_cast<double>(s.n_band);
  };
  double ell = 0.5 * (lo + hi);
  double residual = mass_of_ell(phi, ell, p) - target_mass;
  double previous_residual = std::numeric_limits<double>::infinity();
  constexpr int kMaxIterations = 200;
  while (std::abs(residual) > tol_mass && out.iterations < kMaxIterations) {
    if (residual < 0.0) {
      lo = ell;
    } else {
      hi = ell;
    }
    // Jump to the root of the current piece when it is inside the bracket and the
    // last jump at least halved the residual; otherwise bisect.
    double next = 0.5 * (lo + hi);
    if (std::abs(residual) <= 0.5 * std::abs(previous_residual)) {
      const ActiveSet s = classify(phi.values, ell, p);
      if (s.n_band > 0) {
        const double c = piece_root(s);
        if (c > lo && c < hi) next = c;
      }
    }
    if (next == lo || next == hi) break;
    previous_residual = residual;
    ell = next;
    residual = mass_of_ell(phi, ell, p) - target_mass;
    ++out.iterations;
  }

  const ActiveSet active = classify(phi.values, ell, p);
  if (active.n_band == 0) {
    // Mass is constant near ell: the plateau runs between the nearest breakpoints.
    double left = -std::numeric_limits<double>::infinity();
    double right = std::numeric_limits<double>::infinity();
    for (double v : phi.values) {
      if (v + ell >= p.upper()) {
        left = std::max(left, p.upper() - v);
      } else {
        right = std::min(right, p.lower() - v);
      }
    }
    if (std::isfinite(left) && std::isfinite(right) && right >= left) {
      ell = 0.5 * (left + right);
      if (right > left) out.flat_interval = std::make_pair(left, right);
      residual = mass_of_ell(phi, ell, p) - target_mass;
    }
  } else {
    // Exact solve on the linear piece of the mass function.
    const double candidate = piece_root(active);
    if (same_active_set(classify(phi.values, candidate, p), active)) {
      const double r = mass_of_ell(phi, candidate, p) - target_mass;
      if (std::abs(r) <= std::abs(residual)) {
        ell = candidate;
        residual = r;
      }
    }
  }

  out.ell = ell;
  out.mass_residual = residual;
  if (std::abs(residual) > tol_mass) {
    std::ostringstream msg;
    msg << "solve_multiplier: mass residual " << residual << " exceeds tolerance " << tol_mass;
    throw std::runtime_error(msg.str());
  }
  return out;
}

void density_from_multiplier(const ScalarField& phi, double ell, const PotentialParams& p,
                             ScalarField& rho) {
  rho.grid = phi.grid;
  rho.values.resize(phi.size());
  for (std::size_t n = 0; n < phi.size(); ++n) rho[n] = g_star_prime(phi[n] + ell, p);
}

std::pair<ScalarField, MultiplierSolve> rho_of_phi(const ScalarField& phi, double target_mass,
                                                   const PotentialParams& p, double tol) {
  MultiplierSolve solve = solve_multiplier(phi, target_mass, p, tol);
  ScalarField rho;
  density_from_multiplier(phi, solve.ell, p, rho);
  return {std::move(rho), solve};
}

}  // namespace pks
