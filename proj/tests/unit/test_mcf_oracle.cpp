#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pks/mcf_oracle.hpp"

using namespace pks::mcf;

namespace {

CircleSystem circles(int d, std::vector<double> radii) {
  CircleSystem s;
  s.d = d;
  s.radii = std::move(radii);
  s.centers.assign(s.radii.size(), {0.0, 0.0, 0.0});
  return s;
}

}  // namespace

TEST_CASE("circle rates") {
  const CircleRates one = circle_rhs(circles(2, {0.5}));
  CHECK(one.lambda == doctest::Approx(2.0));
  CHECK(one.radii_rates[0] == doctest::Approx(0.0).scale(1e-15));

  const CircleRates two = circle_rhs(circles(2, {0.3, 0.5}));
  CHECK(two.lambda == doctest::Approx(2.5));
  CHECK(two.radii_rates[0] == doctest::Approx(-1.0 / 0.3 + 2.5));
  CHECK(two.radii_rates[1] == doctest::Approx(0.5));

  const CircleRates three = circle_rhs(circles(3, {0.3, 0.5}));
  CHECK(three.lambda == doctest::Approx(2.0 * 0.8 / 0.34));
  CHECK(three.radii_rates[0] < 0.0);

  for (int d : {2, 3}) {
    const CircleSystem s = circles(d, {0.11, 0.27, 0.4, 0.9});
    const CircleRates r = circle_rhs(s);
    double flux = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < s.radii.size(); ++i) {
      flux += std::pow(s.radii[i], d - 1) * r.radii_rates[i];
      scale += std::pow(s.radii[i], d - 1) * std::abs(r.radii_rates[i]);
    }
    CHECK(std::abs(flux) <= 1e-14 * scale);
  }
  CHECK_THROWS_AS(circle_rhs(circles(2, {0.3, 0.0})), DegenerateCircle);
  CHECK_THROWS_AS(circle_rhs(circles(2, {-0.1})), DegenerateCircle);
}

TEST_CASE("single circle trajectory is constant") {
  const CircleTrajectory t = integrate_circles(circles(2, {0.4}), 1e-3, 0.5);
  CHECK_FALSE(t.stopped_early);
  for (const auto& r : t.radii) CHECK(r[0] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(t.times.back() == doctest::Approx(0.5));
}

TEST_CASE("two circles: Ostwald ripening to the conserved area") {
  const CircleTrajectory t = integrate_circles(circles(2, {0.3, 0.5}), 1e-5, 1.0);
  CHECK(t.stopped_early);
  CHECK(t.volume_drift <= 1e-8);
  CHECK(t.radii.back()[0] < 5.0 * std::sqrt(1e-5) + 1e-12);
  // The survivor approaches sqrt(R1^2 + R2^2) as the small circle vanishes.
  const double r_small = t.radii.back()[0];
  CHECK(std::sqrt(t.radii.back()[1] * t.radii.back()[1] + r_small * r_small) ==
        doctest::Approx(std::sqrt(0.34)).epsilon(1e-8));
  CHECK(std::sqrt(0.34) == doctest::Approx(0.5831).epsilon(1e-4));
  for (std::size_t n = 1; n < t.radii.size(); ++n) {
    CHECK(t.radii[n][0] < t.radii[n - 1][0]);
    CHECK(t.radii[n][1] > t.radii[n - 1][1]);
  }
}

TEST_CASE("spheres conserve volume too") {
  const CircleTrajectory t = integrate_circles(circles(3, {0.2, 0.25, 0.4}), 1e-5, 0.05);
  CHECK(t.volume_drift <= 1e-8);
}

TEST_CASE("radii_at interpolates and clamps") {
  const CircleTrajectory t = integrate_circles(circles(2, {0.3, 0.5}), 1e-3, 0.01);
  const auto mid = radii_at(t, 0.0055);
  CHECK(mid[0] == doctest::Approx(0.5 * (t.radii[5][0] + t.radii[6][0])).epsilon(1e-12));
  CHECK(radii_at(t, -1.0) == t.radii.front());
  CHECK(radii_at(t, 9.0) == t.radii.back());
}

TEST_CASE("front curve geometry") {
  const FrontCurve c = make_circle_front({0.0, 0.0}, 0.5, 256);
  const double n = 256.0;
  CHECK(c.area() == doctest::Approx(0.5 * n * 0.25 * std::sin(2 * std::numbers::pi / n)));
  CHECK(c.length() == doctest::Approx(n * 2 * 0.5 * std::sin(std::numbers::pi / n)));
  for (double k : nodal_curvature(c)) CHECK(k == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(is_simple(c));

  FrontCurve bow = make_circle_front({0.0, 0.0}, 1.0, 8);
  std::swap(bow.nodes[1], bow.nodes[5]);
  CHECK_FALSE(is_simple(bow));

  const FrontCurve e = make_ellipse_front({0.0, 0.0}, 0.7071, 0.3536, 200);
  CHECK(e.area() == doctest::Approx(std::numbers::pi * 0.7071 * 0.3536).epsilon(1e-3));
  double lo = 1e9, hi = 0.0;
  for (std::size_t i = 0; i < e.nodes.size(); ++i) {
    const auto& a = e.nodes[i];
    const auto& b = e.nodes[(i + 1) % e.nodes.size()];
    const double ds = std::hypot(b[0] - a[0], b[1] - a[1]);
    lo = std::min(lo, ds);
    hi = std::max(hi, ds);
  }
  CHECK(hi / lo < 1.01);
}

TEST_CASE("resampling preserves a circle") {
  const FrontCurve c = make_circle_front({0.2, -0.1}, 0.5, 100);
  const FrontCurve r = resample(c, 150);
  CHECK(r.nodes.size() == 150);
  for (const auto& p : r.nodes) CHECK(std::hypot(p[0] - 0.2, p[1] + 0.1) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("front step on a circle is nearly stationary") {
  const FrontCurve c = make_circle_front({0.0, 0.0}, 0.5, 256);
  const double dt = stable_front_dt(FrontSystem{{c}});
  double lambda = 0.0;
  const FrontCurve next = front_track_step(c, dt, &lambda);
  CHECK(lambda == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(std::abs(std::sqrt(next.area() / std::numbers::pi) - std::sqrt(c.area() / std::numbers::pi)) <= 1e-6 * 0.5);
}

TEST_CASE("ellipse relaxes to a circle of the same area") {
  FrontCurve c = make_ellipse_front({0.0, 0.0}, 0.7071, 0.3536, 128);
  const double a0 = c.area();
  const double dt = stable_front_dt(FrontSystem{{c}});
  double worst_step = 0.0;
  for (double t = 0.0; t < 0.3; t += dt) {
    const double before = c.area();
    c = front_track_step(c, dt);
    worst_step = std::max(worst_step, std::abs(c.area() - before) / before);
  }
  CHECK(worst_step <= 1e-6);
  CHECK(std::abs(c.isoperimetric_ratio() - 1.0) < 1e-3);
  CHECK(c.area() == doctest::Approx(a0).epsilon(1e-3));
}

TEST_CASE("two-curve front system follows the circle ODE") {
  FrontSystem fs{{make_circle_front({0.5, 0.5}, 0.2, 96), make_circle_front({1.5, 1.5}, 0.35, 96)}};
  const double dt = stable_front_dt(fs);
  const double t_end = 0.01;
  const CircleTrajectory ode = integrate_circles(circles(2, {0.2, 0.35}), 1e-6, t_end);
  double t = 0.0;
  double lambda = 0.0;
  while (t < t_end - 1e-12) {
    const double h = std::min(dt, t_end - t);
    fs = front_track_step(fs, h, &lambda);
    t += h;
  }
  const auto ref = radii_at(ode, t_end);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::sqrt(fs.curves[i].area() / std::numbers::pi) == doctest::Approx(ref[i]).epsilon(2e-3));
  }
}
