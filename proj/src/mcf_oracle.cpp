#include "pks/mcf_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace pks::mcf {

namespace {

double unit_ball_volume(int d) { return d == 3 ? 4.0 / 3.0 * std::numbers::pi : std::numbers::pi; }

void require_dimension(int d) {
  if (d != 2 && d != 3) throw std::invalid_argument("circle oracle supports d = 2 or 3");
}

}  // namespace

double CircleSystem::total_volume() const {
  double v = 0.0;
  for (double r : radii) v += std::pow(r, d);
  return unit_ball_volume(d) * v;
}

CircleRates circle_rhs(const CircleSystem& sys) {
  require_dimension(sys.d);
  if (sys.radii.empty()) throw DegenerateCircle("circle_rhs: no circles");
  double num = 0.0;
  double den = 0.0;
  for (double r : sys.radii) {
    if (!(r > 0.0)) {
      std::ostringstream msg;
      msg << "circle_rhs: radius " << r << " is not positive";
      throw DegenerateCircle(msg.str());
    }
    num += std::pow(r, sys.d - 2);
    den += std::pow(r, sys.d - 1);
  }
  const double curvature_factor = sys.d - 1;
  CircleRates out;
  out.lambda = curvature_factor * num / den;
  out.radii_rates.reserve(sys.radii.size());
  for (double r : sys.radii) out.radii_rates.push_back(-curvature_factor / r + out.lambda);
  return out;
}

CircleTrajectory integrate_circles(const CircleSystem& sys, double dt, double t_end) {
  require_dimension(sys.d);
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_circles: dt must be positive");
  circle_rhs(sys);  // validates radii

  const int d = sys.d;
  const std::size_t m = sys.radii.size();
  CircleTrajectory traj;
  traj.stop_threshold = 5.0 * std::sqrt(dt);

  std::vector<double> vol(m);
  for (std::size_t i = 0; i < m; ++i) vol[i] = std::pow(sys.radii[i], d);
  const double total0 = std::accumulate(vol.begin(), vol.end(), 0.0);

  auto radii_of = [d](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = std::pow(std::max(v[i], 0.0), 1.0 / d);
    return r;
  };
  // dv/dt = d R^{d-1} dR/dt.
  auto rhs = [&](const std::vector<double>& v, double* lambda) {
    CircleSystem s{d, radii_of(v), {}};
    const CircleRates rates = circle_rhs(s);
    if (lambda != nullptr) *lambda = rates.lambda;
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[i] = d * std::pow(s.radii[i], d - 1) * rates.radii_rates[i];
    }
    return out;
  };

  auto emit = [&](double t, const std::vector<double>& v) {
    double lambda = 0.0;
    rhs(v, &lambda);
    traj.times.push_back(t);
    traj.radii.push_back(radii_of(v));
    traj.lambda.push_back(lambda);
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    traj.volume_drift = std::max(traj.volume_drift, std::abs(total - total0) / total0);
  };

  emit(0.0, vol);
  const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  for (long n = 1; n <= steps; ++n) {
    const auto r = radii_of(vol);
    if (*std::min_element(r.begin(), r.end()) < traj.stop_threshold) {
      traj.stopped_early = true;
      break;
    }
    const auto k1 = rhs(vol, nullptr);
    std::vector<double> tmp(m);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = vol[i] + 0.5 * dt * k1[i];
    const auto k2 = rhs(tmp, nullptr);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = vol[i] + 0.5 * dt * k2[i];
    const auto k3 = rhs(tmp, nullptr);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = vol[i] + dt * k3[i];
    const auto k4 = rhs(tmp, nullptr);
    for (std::size_t i = 0; i < m; ++i) {
      vol[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    emit(static_cast<double>(n) * dt, vol);
  }
  return traj;
}

std::vector<double> radii_at(const CircleTrajectory& traj, double t) {
  if (traj.times.empty()) return {};
  if (t <= traj.times.front()) return traj.radii.front();
  if (t >= traj.times.back()) return traj.radii.back();
  const auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - traj.times.begin());
  const double s = (t - traj.times[k - 1]) / (traj.times[k] - traj.times[k - 1]);
  std::vector<double> out(traj.radii[k].size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 - s) * traj.radii[k - 1][i] + s * traj.radii[k][i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Front tracking

double FrontCurve::length() const {
  double l = 0.0;
  const std::size_t n = nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = nodes[i];
    const Point& b = nodes[(i + 1) % n];
    l += std::hypot(b[0] - a[0], b[1] - a[1]);
  }
  return l;
}

double FrontCurve::area() const {
  double s = 0.0;
  const std::size_t n = nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = nodes[i];
    const Point& b = nodes[(i + 1) % n];
    s += a[0] * b[1] - b[0] * a[1];
  }
  return 0.5 * s;
}

double FrontSystem::total_area() const {
  double a = 0.0;
  for (const FrontCurve& c : curves) a += c.area();
  return a;
}

FrontCurve make_ellipse_front(Point center, double a, double b, std::size_t nodes) {
  if (nodes < 8) throw std::invalid_argument("front curve needs at least 8 nodes");
  FrontCurve c;
  c.nodes.reserve(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(nodes);
    c.nodes.push_back({center[0] + a * std::cos(th), center[1] + b * std::sin(th)});
  }
  // Equal spacing in arc length, not in angle.
  c = resample(c, nodes);
  c.resample_spacing = c.length() / static_cast<double>(nodes);
  return c;
}

FrontCurve make_circle_front(Point center, double radius, std::size_t nodes) {
  if (nodes < 8) throw std::invalid_argument("front curve needs at least 8 nodes");
  FrontCurve c;
  c.nodes.reserve(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(nodes);
    c.nodes.push_back({center[0] + radius * std::cos(th), center[1] + radius * std::sin(th)});
  }
  c.resample_spacing = c.length() / static_cast<double>(nodes);
  return c;
}

std::vector<double> nodal_curvature(const FrontCurve& curve) {
  const std::size_t n = curve.nodes.size();
  std::vector<double> kappa(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = curve.nodes[(i + n - 1) % n];
    const Point& b = curve.nodes[i];
    const Point& c = curve.nodes[(i + 1) % n];
    const double cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    const double ab = std::hypot(b[0] - a[0], b[1] - a[1]);
    const double bc = std::hypot(c[0] - b[0], c[1] - b[1]);
    const double ca = std::hypot(a[0] - c[0], a[1] - c[1]);
    kappa[i] = 2.0 * cross / (ab * bc * ca);
  }
  return kappa;
}

namespace {

// Solves the cyclic tridiagonal system with constant-pattern bands
// lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i] (indices mod n).
std::vector<double> solve_cyclic(std::vector<double> lower, std::vector<double> diag,
                                 std::vector<double> upper, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  // Sherman-Morrison with the corner terms lower[0] and upper[n-1].
  const double alpha = upper[n - 1];
  const double beta = lower[0];
  const double gamma = -diag[0];
  diag[0] -= gamma;
  diag[n - 1] -= alpha * beta / gamma;

  auto thomas = [&](std::vector<double> r) {
    std::vector<double> c(n);
    std::vector<double> x(n);
    double bet = diag[0];
    x[0] = r[0] / bet;
    for (std::size_t i = 1; i < n; ++i) {
      c[i] = upper[i - 1] / bet;
      bet = diag[i] - lower[i] * c[i];
      x[i] = (r[i] - lower[i] * x[i - 1]) / bet;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i + 1] * x[i + 1];
    return x;
  };

  std::vector<double> x = thomas(rhs);
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  std::vector<double> z = thomas(u);
  const double fact =
      (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
  return x;
}

bool segments_cross(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  auto orient = [](const Point& a, const Point& b, const Point& c) {
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
  };
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

bool curves_cross(const FrontCurve& a, const FrontCurve& b, bool same) {
  const std::size_t na = a.nodes.size();
  const std::size_t nb = b.nodes.size();
  for (std::size_t i = 0; i < na; ++i) {
    const Point& p1 = a.nodes[i];
    const Point& p2 = a.nodes[(i + 1) % na];
    const double xmin = std::min(p1[0], p2[0]);
    const double xmax = std::max(p1[0], p2[0]);
    const double ymin = std::min(p1[1], p2[1]);
    const double ymax = std::max(p1[1], p2[1]);
    for (std::size_t j = same ? i + 2 : 0; j < nb; ++j) {
      if (same && i == 0 && j == nb - 1) continue;  // adjacent through the wrap
      const Point& q1 = b.nodes[j];
      const Point& q2 = b.nodes[(j + 1) % nb];
      if (std::max(q1[0], q2[0]) < xmin || std::min(q1[0], q2[0]) > xmax ||
          std::max(q1[1], q2[1]) < ymin || std::min(q1[1], q2[1]) > ymax) {
        continue;
      }
      if (segments_cross(p1, p2, q1, q2)) return true;
    }
  }
  return false;
}

}  // namespace

FrontCurve resample(const FrontCurve& curve, std::size_t n) {
  const std::size_t m = curve.nodes.size();
  if (m < 4 || n < 4) throw std::invalid_argument("resample: too few nodes");
  std::vector<double> seg(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Point& a = curve.nodes[i];
    const Point& b = curve.nodes[(i + 1) % m];
    seg[i] = std::hypot(b[0] - a[0], b[1] - a[1]);
    if (!(seg[i] > 0.0)) throw TopologyChange("resample: coincident nodes");
  }
  std::vector<double> knots(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) knots[i + 1] = knots[i] + seg[i];
  const double total = knots[m];

  // Periodic cubic spline second derivatives, one coordinate at a time.
  std::vector<double> lower(m), diag(m), upper(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double hp = seg[(i + m - 1) % m];
    const double hn = seg[i];
    lower[i] = hp;
    diag[i] = 2.0 * (hp + hn);
    upper[i] = hn;
  }
  std::array<std::vector<double>, 2> second;
  for (int c = 0; c < 2; ++c) {
    std::vector<double> rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double hp = seg[(i + m - 1) % m];
      const double hn = seg[i];
      const double yp = curve.nodes[(i + m - 1) % m][c];
      const double y = curve.nodes[i][c];
      const double yn = curve.nodes[(i + 1) % m][c];
      rhs[i] = 6.0 * ((yn - y) / hn - (y - yp) / hp);
    }
    second[c] = solve_cyclic(lower, diag, upper, rhs);
  }

  FrontCurve out;
  out.resample_spacing = curve.resample_spacing;
  out.nodes.reserve(n);
  std::size_t k = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double s = total * static_cast<double>(j) / static_cast<double>(n);
    while (k + 1 < m && knots[k + 1] <= s) ++k;
    const double h = seg[k];
    const double t = (s - knots[k]) / h;
    Point p{};
    for (int c = 0; c < 2; ++c) {
      const double y0 = curve.nodes[k][c];
      const double y1 = curve.nodes[(k + 1) % m][c];
      const double m0 = second[c][k];
      const double m1 = second[c][(k + 1) % m];
      const double a = 1.0 - t;
      p[c] = a * y0 + t * y1 + h * h / 6.0 * ((a * a * a - a) * m0 + (t * t * t - t) * m1);
    }
    out.nodes.push_back(p);
  }
  return out;
}

bool is_simple(const FrontCurve& curve) { return !curves_cross(curve, curve, true); }

double stable_front_dt(const FrontSystem& fronts, double safety) {
  double min_ds = std::numeric_limits<double>::infinity();
  for (const FrontCurve& c : fronts.curves) {
    const std::size_t n = c.nodes.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = c.nodes[i];
      const Point& b = c.nodes[(i + 1) % n];
      min_ds = std::min(min_ds, std::hypot(b[0] - a[0], b[1] - a[1]));
    }
  }
  return safety * min_ds * min_ds;
}

FrontSystem front_track_step(const FrontSystem& fronts, double dt, double* lambda_out) {
  // Area weight of node i: moving it by delta along its normal changes the
  // polygon area by delta * |x_{i+1} - x_{i-1}| / 2.
  std::vector<std::vector<double>> kappa;
  std::vector<std::vector<double>> weight;
  std::vector<std::vector<Point>> normal;
  double num = 0.0;
  double den = 0.0;
  for (const FrontCurve& c : fronts.curves) {
    const std::size_t n = c.nodes.size();
    if (n < 4) throw TopologyChange("front_track_step: curve collapsed");
    kappa.push_back(nodal_curvature(c));
    weight.emplace_back(n);
    normal.emplace_back(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = c.nodes[(i + n - 1) % n];
      const Point& b = c.nodes[(i + 1) % n];
      const double tx = b[0] - a[0];
      const double ty = b[1] - a[1];
      const double len = std::hypot(tx, ty);
      weight.back()[i] = 0.5 * len;
      normal.back()[i] = {ty / len, -tx / len};
      num += kappa.back()[i] * weight.back()[i];
      den += weight.back()[i];
    }
  }
  const double lambda = num / den;
  if (lambda_out != nullptr) *lambda_out = lambda;

  FrontSystem next;
  for (std::size_t ci = 0; ci < fronts.curves.size(); ++ci) {
    const FrontCurve& c = fronts.curves[ci];
    FrontCurve moved = c;
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
      const double v = -kappa[ci][i] + lambda;
      moved.nodes[i][0] += dt * v * normal[ci][i][0];
      moved.nodes[i][1] += dt * v * normal[ci][i][1];
    }
    if (moved.area() <= 0.0) throw TopologyChange("front_track_step: curve inverted");
    // A fixed node count keeps the polygonal area bias constant from step to step.
    FrontCurve resampled = resample(moved, c.nodes.size());
    resampled.resample_spacing = resampled.length() / static_cast<double>(c.nodes.size());
    next.curves.push_back(std::move(resampled));
  }
  for (std::size_t a = 0; a < next.curves.size(); ++a) {
    for (std::size_t b = a; b < next.curves.size(); ++b) {
      if (curves_cross(next.curves[a], next.curves[b], a == b)) {
        throw TopologyChange("front_track_step: self-intersection detected");
      }
    }
  }
  return next;
}

FrontCurve front_track_step(const FrontCurve& curve, double dt, double* lambda_out) {
  FrontSystem sys{{curve}};
  return front_track_step(sys, dt, lambda_out).curves.front();
}

}  // namespace pks::mcf
