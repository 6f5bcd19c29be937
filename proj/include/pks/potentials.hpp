#pragma once

#include <span>
#include <vector>

namespace pks {

/// Model parameter A of the nonlinearity f(rho) = A rho^2 + (hard cap rho <= 1),
/// together with the constants derived from it.
///
/// Construction validates 0 < A < 1/2 and computes the surface-tension
/// constant gamma = int_0^1 sqrt(2 Wbar(s)) ds once by adaptive quadrature.
class PotentialParams {
 public:
  explicit PotentialParams(double a);

  double a() const { return a_; }
  /// 1/2 - A, the half-width of the flat regions of g*'.
  double delta() const { return delta_; }
  double gamma() const { return gamma_; }

  /// Breakpoints of g*': below lower() it is 0, above upper() it is 1.
  double lower() const { return delta_; }
  double upper() const { return 0.5 + a_; }

 private:
  double a_;
  double delta_;
  double gamma_;
};

// g(rho) = A rho^2 + (1/2 - A) rho on [0,1]. Throws std::domain_error outside.
double g_eval(double rho, const PotentialParams& p);

// Convex conjugate of g; C^1 and defined on all of R.
double g_star(double phi, const PotentialParams& p);

// Derivative of g*: piecewise linear, nondecreasing, values in [0,1].
double g_star_prime(double phi, const PotentialParams& p);

// Double well in the density variable, (1/2 - A)(rho - rho^2) on [0,1].
double w_eval(double rho, const PotentialParams& p);

// Double well in the potential variable, phi^2/2 - g*(phi). C^{1,1}.
double wbar_eval(double phi, const PotentialParams& p);
double wbar_prime(double phi, const PotentialParams& p);

/// Integrand of gamma: sqrt(2 Wbar(phi)).
double wbar_root(double phi, const PotentialParams& p);

/// Integrates int_lo^hi sqrt(2 Wbar) by adaptive Gauss-Kronrod, split at the
/// breakpoints of g*'.
double integrate_wbar_root(double lo, double hi, const PotentialParams& p);

/// Heteroclinic transition profile q with q' = sqrt(2 Wbar(q)), q(0) = 1/2.
///
/// Integrated once with classical RK4 at a fixed step in xi, in both
/// directions from xi = 0, and clamped to the wells once within 1e-12 of them.
/// The wells are approached exponentially, so the clamp location is set only by
/// that tolerance (about |xi| = 28 for A = 1/4). Off-node values use cubic
/// Hermite interpolation with the exact slope sqrt(2 Wbar(q)).
class OptimalProfile {
 public:
  explicit OptimalProfile(const PotentialParams& p, double step = 1e-3);

  double operator()(double xi) const;
  double slope(double xi) const;

  double xi_min() const { return xi_min_; }
  double xi_max() const { return xi_max_; }

 private:
  PotentialParams params_;
  double step_;
  double xi_min_;  // left end of the table; q == 0 below it
  double xi_max_;  // right end; q == 1 above it
  std::vector<double> values_;  // q at xi_min_ + k * step_
};

/// Samples the optimal profile at the given (sorted) abscissae.
std::vector<double> optimal_profile(const PotentialParams& p, std::span<const double> xi_samples);

}  // namespace pks
