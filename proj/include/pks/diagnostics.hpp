#pragma once

#include <span>
#include <vector>

// Boost 1.74's pchip calls isnan unqualified; <math.h> puts it in the global namespace.
#include <math.h>

#include <boost/math/interpolators/pchip.hpp>

#include "pks/field.hpp"
#include "pks/potentials.hpp"

namespace pks {

/// Per-step analysis quantities.
struct StepRecord {
  double t = 0.0;
  double dt = 0.0;
  double ell = 0.0;
  double lambda = 0.0;         // ell / (gamma eps)
  double energy_J = 0.0;       // (1/eps) int W(rho) + (rho-phi)^2/2 + (eps/2) int |grad phi|^2
  double energy_J_alt = 0.0;   // conjugate-gap + Modica-Mortola form
  double dissipation = 0.0;    // int eps |d_t phi|^2 dx * dt for this step
  double dissipation_cum = 0.0;
  double mass_rho = 0.0;
  double forcing_l2 = 0.0;     // eps^-1 int |G|^2 dx at this time
  double forcing_l2_cum = 0.0; // eps^-1 sum dt int |G|^2 dx
  double area_over_half = 0.0;
  double perimeter_ms = 0.0;
  double radius_est = 0.0;

  // Not part of the CSV schema.
  double phi_min = 0.0;
  double phi_max = 0.0;
  double mismatch_l2_sq = 0.0;       // ||phi - rho||^2
  double transition_fraction = 0.0;  // share of cells with dist(phi, {0,1}) > delta/2
  double modica_mortola = 0.0;       // int Wbar(phi)/eps + eps |grad phi|^2 / 2
  double bv_psi = 0.0;
  bool forcing_localized = true;
};

struct EnergyPair {
  double squared_form = 0.0;   // W(rho) + (rho - phi)^2 / 2 form
  double conjugate_form = 0.0; // g + g* - rho phi plus Modica-Mortola form
};

/// Both algebraic forms of J_eps. Gradients use face differences, i.e. the
/// Dirichlet form of the same Laplacian the stepper inverts.
/// Throws std::domain_error if |mass(rho) - target_mass| > mass_tol.
EnergyPair energy_J(const ScalarField& phi, const ScalarField& rho, double ell, double eps,
                    const PotentialParams& p, double target_mass = 1.0, double mass_tol = 1e-8);

/// gamma^-1 (Wbar(phi)/eps + eps |grad phi|^2 / 2) per cell.
ScalarField energy_measure_density(const ScalarField& phi, double eps, const PotentialParams& p);

/// int Wbar(phi)/eps + eps |grad phi|^2 / 2.
double modica_mortola_energy(const ScalarField& phi, double eps, const PotentialParams& p);

/// G_i = eps^-1 (g*'(phi_i + ell) - g*'(phi_i)).
ScalarField forcing_field(const ScalarField& phi, double ell, double eps,
                          const PotentialParams& p);

/// eps^-1 int |G|^2 dx, i.e. eps^-3 int |g*'(phi + ell) - g*'(phi)|^2 dx.
double forcing_l2_rate(const ScalarField& forcing, double eps);

/// eps^-1 sum_n dt_n int |G_n|^2 dx over a series of forcing fields.
double forcing_l2_accum(std::span<const ScalarField> forcing_series, std::span<const double> dts,
                        double eps);

/// True iff G vanishes wherever phi lies within delta/2 of a well, or |ell| >= delta/2.
bool forcing_is_localized(const ScalarField& phi, const ScalarField& forcing, double ell,
                          const PotentialParams& p);

/// F(v) = gamma^-1 int_0^v sqrt(2 Wbar), tabulated at 10^4 + 1 nodes on [0,1]
/// with monotone cubic (PCHIP) interpolation; F(v) = 0 below 0 and 1 above 1.
class TruncationTable {
 public:
  explicit TruncationTable(const PotentialParams& p, std::size_t nodes = 10001);
  double operator()(double v) const;

 private:
  boost::math::interpolators::pchip<std::vector<double>> interp_;
};

ScalarField truncation_psi(const ScalarField& phi, const TruncationTable& table);
ScalarField truncation_psi(const ScalarField& phi, const PotentialParams& p);

/// h^d sum |grad_h psi| with centered differences, which do not inflate the
/// variation of profiles resolved by only a few cells.
double bv_seminorm(const ScalarField& psi);

struct InterfaceGeometry {
  double area_over_half = 0.0;  // volume in 3D
  double perimeter = 0.0;       // marching-squares length in 2D; int |grad phi| in 3D
  double radius = 0.0;
};

/// Geometry of {phi > 1/2}.
InterfaceGeometry interface_geometry(const ScalarField& phi);

/// Length of the phi = level contour by marching squares over cell centers.
/// Saddle cells are split by comparing the mean of the four corners to the level.
double contour_length(const ScalarField& phi, double level = 0.5);

/// Measures of the face-connected components of {phi > level}, largest first.
std::vector<double> component_volumes(const ScalarField& phi, double level = 0.5);

/// Share of cells with dist(phi, {0,1}) > delta / 2.
double transition_fraction(const ScalarField& phi, const PotentialParams& p);

/// int eps |(phi_new - phi_old)/dt|^2 dx * dt.
double dissipation_increment(const ScalarField& phi_old, const ScalarField& phi_new, double dt,
                             double eps);

/// sum dt Lambda^2 over records with t0 < t <= t1.
double lambda_l2(std::span<const StepRecord> records, double t0, double t1);

/// Mean of Lambda over records with t0 < t <= t1, weighted by dt.
double lambda_mean(std::span<const StepRecord> records, double t0, double t1);

}  // namespace pks
