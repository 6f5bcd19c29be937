#pragma once

#include <array>
#include <stdexcept>
#include <vector>

namespace pks::mcf {

/// Disjoint circles (d = 2) or spheres (d = 3) with fixed centers, coupled only
/// through the multiplier that keeps their total volume constant.
struct CircleSystem {
  int d = 2;
  std::vector<double> radii;
  std::vector<std::array<double, 3>> centers;

  double total_volume() const;
};

class DegenerateCircle : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct CircleRates {
  std::vector<double> radii_rates;
  double lambda = 0.0;
};

/// dR_i/dt = -(d-1)/R_i + Lambda with Lambda = (d-1) sum R^{d-2} / sum R^{d-1}.
/// Throws DegenerateCircle if any radius is not positive.
CircleRates circle_rhs(const CircleSystem& sys);

struct CircleTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> radii;  // radii[n][i]
  std::vector<double> lambda;
  bool stopped_early = false;  // a radius fell below the disappearance threshold
  double volume_drift = 0.0;   // max relative drift of the total volume
  double stop_threshold = 0.0;
};

/// Classical RK4 at fixed step on the volumes v_i = R_i^d, whose sum is a
/// linear invariant of the flow and therefore preserved by the integrator.
/// Stops early, flagged, once min R < 5 sqrt(dt).
CircleTrajectory integrate_circles(const CircleSystem& sys, double dt, double t_end);

/// Radii at time t by linear interpolation of a trajectory; clamps to the ends.
std::vector<double> radii_at(const CircleTrajectory& traj, double t);

using Point = std::array<double, 2>;

/// Closed counterclockwise polyline.
struct FrontCurve {
  std::vector<Point> nodes;
  double resample_spacing = 0.0;

  double length() const;
  double area() const;  // signed shoelace area, positive for counterclockwise
  double isoperimetric_ratio() const { return length() * length() / (4.0 * 3.14159265358979323846 * area()); }
};

/// Several closed curves evolving under a shared multiplier.
struct FrontSystem {
  std::vector<FrontCurve> curves;
  double total_area() const;
};

class TopologyChange : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

FrontCurve make_circle_front(Point center, double radius, std::size_t nodes);
FrontCurve make_ellipse_front(Point center, double a, double b, std::size_t nodes);

/// Signed curvature of the circle through three consecutive nodes (positive
/// for a convex counterclockwise curve).
std::vector<double> nodal_curvature(const FrontCurve& curve);

/// One explicit step of V = -kappa + Lambda along the outward normal, with
/// Lambda = sum kappa_i ds_i / L over all curves, followed by arc-length
/// resampling through a periodic cubic spline that keeps the node count.
/// Throws TopologyChange on self-intersection.
FrontSystem front_track_step(const FrontSystem& fronts, double dt, double* lambda_out = nullptr);
FrontCurve front_track_step(const FrontCurve& curve, double dt, double* lambda_out = nullptr);

/// Uniform arc-length resampling to n nodes through a periodic cubic spline.
FrontCurve resample(const FrontCurve& curve, std::size_t n);

bool is_simple(const FrontCurve& curve);

/// Largest stable explicit step for the given curves, a fraction of min ds^2.
double stable_front_dt(const FrontSystem& fronts, double safety = 0.2);

}  // namespace pks::mcf
