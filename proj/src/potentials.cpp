#include "pks/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pks {

namespace {

constexpr double kWellTolerance = 1e-12;

void require_density(double rho, const char* what) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::domain_error(std::string(what) + ": density " + std::to_string(rho) +
                            " outside [0,1]");
  }
}

double adaptive(double lo, double hi, const PotentialParams& p) {
  if (hi <= lo) return 0.0;
  auto f = [&p](double s) { return wbar_root(s, p); };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 10, 1e-10,
                                                                       &err);
}

}  // namespace

PotentialParams::PotentialParams(double a) : a_(a), delta_(0.5 - a), gamma_(0.0) {
  if (!(a > 0.0 && a < 0.5)) {
    throw std::domain_error("PotentialParams: A must lie in (0, 1/2), got " + std::to_string(a));
  }
  gamma_ = integrate_wbar_root(0.0, 1.0, *this);
}

double g_eval(double rho, const PotentialParams& p) {
  require_density(rho, "g_eval");
  return p.a() * rho * rho + p.delta() * rho;
}

double g_star(double phi, const PotentialParams& p) {
  if (phi <= p.lower()) return 0.0;
  if (phi >= p.upper()) return phi - 0.5;
  const double s = phi - p.lower();
  return s * s / (4.0 * p.a());
}

double g_star_prime(double phi, const PotentialParams& p) {
  if (phi <= p.lower()) return 0.0;
  if (phi >= p.upper()) return 1.0;
  return (phi - p.lower()) / (2.0 * p.a());
}

double w_eval(double rho, const PotentialParams& p) {
  require_density(rho, "w_eval");
  return p.delta() * (rho - rho * rho);
}

double wbar_eval(double phi, const PotentialParams& p) {
  if (phi <= p.lower()) return 0.5 * phi * phi;
  if (phi >= p.upper()) return 0.5 * (phi - 1.0) * (phi - 1.0);
  const double s = phi - p.lower();
  return 0.5 * phi * phi - s * s / (4.0 * p.a());
}

double wbar_prime(double phi, const PotentialParams& p) { return phi - g_star_prime(phi, p); }

double wbar_root(double phi, const PotentialParams& p) {
  // Closed forms on the outer branches avoid sqrt(x^2) rounding.
  if (phi <= p.lower()) return std::abs(phi);
  if (phi >= p.upper()) return std::abs(phi - 1.0);
  return std::sqrt(std::max(0.0, 2.0 * wbar_eval(phi, p)));
}

double integrate_wbar_root(double lo, double hi, const PotentialParams& p) {
  if (hi < lo) return -integrate_wbar_root(hi, lo, p);
  double cuts[4] = {lo, std::clamp(p.lower(), lo, hi), std::clamp(p.upper(), lo, hi), hi};
  double total = 0.0;
  for (int k = 0; k < 3; ++k) total += adaptive(cuts[k], cuts[k + 1], p);
  return total;
}

OptimalProfile::OptimalProfile(const PotentialParams& p, double step)
    : params_(p), step_(step), xi_min_(0.0), xi_max_(0.0) {
  if (!(step > 0.0)) throw std::invalid_argument("OptimalProfile: step must be positive");

  auto march = [&](double direction, double well) {
    std::vector<double> out;
    double q = 0.5;
    auto rhs = [&](double v) { return direction * wbar_root(v, params_); };
    while (std::abs(q - well) > kWellTolerance) {
      const double k1 = rhs(q);
      const double k2 = rhs(q + 0.5 * step * k1);
      const double k3 = rhs(q + 0.5 * step * k2);
      const double k4 = rhs(q + step * k3);
      q += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (std::abs(q - well) <= kWellTolerance || (direction > 0 ? q > well : q < well)) q = well;
      out.push_back(q);
    }
    return out;
  };

  std::vector<double> forward = march(+1.0, 1.0);
  std::vector<double> backward = march(-1.0, 0.0);

  values_.reserve(forward.size() + backward.size() + 1);
  values_.assign(backward.rbegin(), backward.rend());
  values_.push_back(0.5);
  values_.insert(values_.end(), forward.begin(), forward.end());
  xi_min_ = -static_cast<double>(backward.size()) * step_;
  xi_max_ = static_cast<double>(forward.size()) * step_;
}

double OptimalProfile::operator()(double xi) const {
  if (xi <= xi_min_) return 0.0;
  if (xi >= xi_max_) return 1.0;
  const double u = (xi - xi_min_) / step_;
  const auto k = std::min(static_cast<std::size_t>(u), values_.size() - 2);
  const double t = u - static_cast<double>(k);
  const double q0 = values_[k];
  const double q1 = values_[k + 1];
  const double m0 = step_ * wbar_root(q0, params_);
  const double m1 = step_ * wbar_root(q1, params_);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double value = (2 * t3 - 3 * t2 + 1) * q0 + (t3 - 2 * t2 + t) * m0 +
                       (-2 * t3 + 3 * t2) * q1 + (t3 - t2) * m1;
  return std::clamp(value, 0.0, 1.0);
}

double OptimalProfile::slope(double xi) const { return wbar_root((*this)(xi), params_); }

std::vector<double> optimal_profile(const PotentialParams& p, std::span<const double> xi_samples) {
  const OptimalProfile profile(p);
  std::vector<double> out;
  out.reserve(xi_samples.size());
  for (double xi : xi_samples) out.push_back(profile(xi));
  return out;
}

}  // namespace pks
