#pragma once

#include <optional>
#include <stdexcept>
#include <utility>

#include "pks/field.hpp"
#include "pks/potentials.hpp"

namespace pks {

/// Raised when the requested mass cannot be carried by densities in [0,1] on the grid.
class InfeasibleMass : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Result of the scalar root find for the multiplier ell.
struct MultiplierSolve {
  double ell = 0.0;
  double mass_residual = 0.0;
  /// Set when the mass function is constant at the target on an interval; ell is its midpoint.
  std::optional<std::pair<double, double>> flat_interval;
  int iterations = 0;
};

/// h^d * sum_i g*'(phi_i + ell). Nondecreasing in ell, range [0, |Omega|].
double mass_of_ell(const ScalarField& phi, double ell, const PotentialParams& p);

/// Finds ell with mass_of_ell(phi, ell) = target_mass.
///
/// The mass is piecewise linear in ell. Starting from the bracket
/// [min(1/2 - A - phi) - 1, max(1/2 + A - phi) + 1], which holds every root, each
/// iteration jumps to the root of the current linear piece when that lands
/// inside the bracket and bisects otherwise; a final exact solve on the piece
/// that contains the root polishes the result. When no cell sits strictly inside the sloped band of g*' at the
/// root, the mass is locally constant; the maximal plateau is then computed in
/// closed form and its midpoint returned.
///
/// Throws InfeasibleMass unless 0 < target_mass < |Omega|.
MultiplierSolve solve_multiplier(const ScalarField& phi, double target_mass,
                                 const PotentialParams& p, double tol = 1e-12);

/// rho_phi = g*'(phi + ell): the minimizer of sum (g(rho_i) - rho_i phi_i) h^d
/// over {0 <= rho <= 1, h^d sum rho = target_mass}.
std::pair<ScalarField, MultiplierSolve> rho_of_phi(const ScalarField& phi, double target_mass,
                                                   const PotentialParams& p, double tol = 1e-12);

/// Pointwise g*'(phi + ell) into rho (resized as needed).
void density_from_multiplier(const ScalarField& phi, double ell, const PotentialParams& p,
                             ScalarField& rho);

}  // namespace pks
