#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pks/diagnostics.hpp"
#include "pks/rho_solver.hpp"
#include "pks/stepper.hpp"

using namespace pks;

namespace {

const double kR0 = 1.0 / std::sqrt(std::numbers::pi);

SimState disk_state(double eps, std::size_t n = 256) {
  SimConfig c;
  c.epsilon = eps;
  c.grid = Grid(n, n, 2.0 / static_cast<double>(n));
  c.init.kind = ShapeKind::disks;
  c.init.balls = {Ball{{1.0, 1.0, 0.0}, kR0}};
  return Simulation(c).initialize();
}

ScalarField smooth_random(const Grid& g, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  const double kx = 1 + 4 * d(gen), ky = 1 + 4 * d(gen), ph = 6 * d(gen);
  ScalarField f(g);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      const auto c = g.center(i, j);
      f[g.index(i, j)] = 0.5 + 0.7 * std::sin(kx * c[0] + ph) * std::cos(ky * c[1]);
    }
  return f;
}

}  // namespace

TEST_CASE("energy forms on the uniform state") {
  const PotentialParams p(0.25);
  const Grid g(2, 2, 1.0);
  const ScalarField phi(g, 0.0), rho(g, 0.25);
  for (double eps : {0.1, 0.02}) {
    const EnergyPair e = energy_J(phi, rho, 0.375, eps, p);
    CHECK(e.squared_form == doctest::Approx(0.3125 / eps).epsilon(1e-14));
    CHECK(e.conjugate_form == doctest::Approx(0.3125 / eps).epsilon(1e-14));
  }
  CHECK_THROWS_AS(energy_J(phi, ScalarField(g, 0.3), 0.375, 0.1, p), std::domain_error);
}

TEST_CASE("wells contribute nothing; only the gradient term remains") {
  const PotentialParams p(0.25);
  const Grid g(4, 4, 0.5);
  ScalarField phi(g, 0.0);
  for (std::size_t i : {5u, 6u, 9u, 10u}) phi[i] = 1.0;  // unit mass block
  const auto [rho, s] = rho_of_phi(phi, 1.0, p);
  const double eps = 0.05;
  const EnergyPair e = energy_J(phi, rho, s.ell, eps, p);
  CHECK(e.squared_form == doctest::Approx(eps * dirichlet_energy(phi)).epsilon(1e-13));
  CHECK(e.conjugate_form == doctest::Approx(e.squared_form).epsilon(1e-12));
}

TEST_CASE("energy identity on random fields") {
  for (double a : {0.1, 0.25, 0.4}) {
    const PotentialParams p(a);
    const Grid g(24, 20, 0.1);
    for (unsigned seed = 0; seed < 5; ++seed) {
      const ScalarField phi = smooth_random(g, seed);
      const auto [rho, s] = rho_of_phi(phi, 1.5, p);
      const EnergyPair e = energy_J(phi, rho, s.ell, 0.03, p, 1.5);
      CHECK(std::abs(e.squared_form - e.conjugate_form) <= 1e-10 * std::abs(e.squared_form));
    }
  }
}

TEST_CASE("disk profile energy is close to gamma times the perimeter") {
  const PotentialParams p(0.25);
  const double target = p.gamma() * 2.0 * std::numbers::pi * kR0;
  CHECK(target == doctest::Approx(0.7911).epsilon(1e-4));
  const SimState s = disk_state(0.02);
  const EnergyPair e = energy_J(s.phi, s.rho, s.ell, 0.02, p);
  CHECK(std::abs(e.squared_form / target - 1.0) < 0.10);
  const double mu = integrate(energy_measure_density(s.phi, 0.02, p));
  CHECK(std::abs(mu / (2.0 * std::numbers::pi * kR0) - 1.0) < 0.10);
  const double bv = bv_seminorm(truncation_psi(s.phi, p));
  CHECK(std::abs(bv / (2.0 * std::numbers::pi * kR0) - 1.0) < 0.10);
  const InterfaceGeometry geom = interface_geometry(s.phi);
  CHECK(std::abs(geom.perimeter / (2.0 * std::sqrt(std::numbers::pi)) - 1.0) < 0.03);
  CHECK(geom.radius == doctest::Approx(kR0).epsilon(0.01));
}

TEST_CASE("energy measure density") {
  const PotentialParams p(0.25);
  const Grid g(6, 6, 0.2);
  const ScalarField zero = energy_measure_density(ScalarField(g, 0.0), 0.1, p);
  for (double v : zero.values) CHECK(v == 0.0);
  const double eps = 0.07;
  const ScalarField half = energy_measure_density(ScalarField(g, 0.5), eps, p);
  for (double v : half.values) CHECK(v == doctest::Approx(0.0625 / (p.gamma() * eps)).epsilon(1e-14));
  const ScalarField phi = smooth_random(g, 3);
  CHECK(integrate(energy_measure_density(phi, eps, p)) * p.gamma() ==
        doctest::Approx(modica_mortola_energy(phi, eps, p)).epsilon(1e-13));
}

TEST_CASE("forcing field examples") {
  const PotentialParams p(0.25);
  const Grid g(4, 4, 0.5);
  const ScalarField phi = smooth_random(g, 4);
  for (double v : forcing_field(phi, 0.0, 0.1, p).values) CHECK(v == 0.0);

  ScalarField wells(g, 0.0);
  for (std::size_t i = 0; i < wells.size(); i += 3) wells[i] = 1.0;
  const ScalarField f = forcing_field(wells, 0.1, 0.1, p);
  for (double v : f.values) CHECK(v == 0.0);
  CHECK(forcing_is_localized(wells, f, 0.1, p));

  const ScalarField mid = forcing_field(ScalarField(g, 0.5), 0.05, 0.1, p);
  for (double v : mid.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  // eps^-1 int |G|^2 over |Omega| = 4.
  CHECK(forcing_l2_rate(mid, 0.1) == doctest::Approx(40.0).epsilon(1e-12));
  const std::vector<ScalarField> series = {mid, mid};
  const std::vector<double> dts = {0.5, 0.25};
  CHECK(forcing_l2_accum(series, dts, 0.1) == doctest::Approx(30.0).epsilon(1e-12));
}

TEST_CASE("forcing vanishes near the wells on random fields") {
  const PotentialParams p(0.25);
  const Grid g(20, 20, 0.1);
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> ell_d(-0.12, 0.12);
  for (unsigned seed = 0; seed < 20; ++seed) {
    const ScalarField phi = smooth_random(g, seed);
    const double ell = ell_d(gen);
    const ScalarField f = forcing_field(phi, ell, 0.05, p);
    CHECK(forcing_is_localized(phi, f, ell, p));
    for (std::size_t i = 0; i < phi.size(); ++i) {
      if (phi[i] <= p.delta() / 2 || phi[i] >= 1.0 - p.delta() / 2) CHECK(f[i] == 0.0);
    }
  }
}

TEST_CASE("truncation table") {
  const PotentialParams p(0.25);
  const TruncationTable table(p);
  CHECK(table(0.0) == 0.0);
  CHECK(table(1.0) == 1.0);
  CHECK(table(-0.5) == 0.0);
  CHECK(table(1.5) == 1.0);
  for (double v = 0.0; v <= 1.0; v += 0.0123) {
    CHECK(std::abs(table(v) - integrate_wbar_root(0.0, v, p) / p.gamma()) < 1e-8);
  }
  const Grid g(3, 3, 1.0);
  for (double v : truncation_psi(ScalarField(g, 0.0), p).values) CHECK(v == 0.0);
  for (double v : truncation_psi(ScalarField(g, 1.0), p).values) CHECK(v == 1.0);
}

TEST_CASE("variation of the truncation stays below the Modica-Mortola energy") {
  const PotentialParams p(0.25);
  const TruncationTable table(p);
  const Grid g(64, 64, 1.0 / 32);
  for (unsigned seed = 0; seed < 10; ++seed) {
    const ScalarField phi = smooth_random(g, seed);
    for (double eps : {0.05, 0.2}) {
      CHECK(bv_seminorm(truncation_psi(phi, table)) <=
            modica_mortola_energy(phi, eps, p) / p.gamma() * (1.0 + 1e-2));
    }
  }
}

TEST_CASE("interface geometry") {
  const InterfaceGeometry none = interface_geometry(ScalarField(Grid(16, 16, 0.1), 0.0));
  CHECK(none.area_over_half == 0.0);
  CHECK(none.perimeter == 0.0);
  CHECK(none.radius == 0.0);

  const std::size_t n = 512;
  const Grid g(n, n, 2.0 / n);
  ScalarField disk(g, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = g.center(i, j);
      if (std::hypot(c[0] - 1.0, c[1] - 1.0) < 0.5) disk[g.index(i, j)] = 1.0;
    }
  const InterfaceGeometry geom = interface_geometry(disk);
  CHECK(std::abs(geom.area_over_half - std::numbers::pi / 4) < 2.0 * g.h * std::numbers::pi);
  CHECK(component_volumes(disk).size() == 1);
}

TEST_CASE("marching squares on a saddle is deterministic and symmetric") {
  const Grid g(2, 2, 1.0);
  ScalarField phi(g, 0.0);
  phi[0] = 1.0;
  phi[3] = 1.0;  // diagonal corners inside, mean 0.5 is not above the level
  const double len = contour_length(phi);
  CHECK(len == doctest::Approx(std::sqrt(2.0)));
  phi[1] = 0.2;  // mean rises above 1/2: the inside corners join
  CHECK(contour_length(phi) > 0.0);
}

TEST_CASE("component volumes of two disks, largest first") {
  const Grid g(128, 128, 2.0 / 128);
  ScalarField phi(g, 0.0);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      const auto c = g.center(i, j);
      if (std::hypot(c[0] - 0.5, c[1] - 0.5) < 0.2 || std::hypot(c[0] - 1.4, c[1] - 1.4) < 0.4) {
        phi[g.index(i, j)] = 1.0;
      }
    }
  const std::vector<double> v = component_volumes(phi);
  REQUIRE(v.size() == 2);
  CHECK(v[0] == doctest::Approx(std::numbers::pi * 0.16).epsilon(0.03));
  CHECK(v[1] == doctest::Approx(std::numbers::pi * 0.04).epsilon(0.05));
}

TEST_CASE("transition fraction, dissipation increment, multiplier norms") {
  const PotentialParams p(0.25);
  const Grid g(2, 2, 1.0);
  ScalarField phi(g, 0.0);
  phi[1] = 0.5;
  CHECK(transition_fraction(phi, p) == doctest::Approx(0.25));

  CHECK(dissipation_increment(phi, phi, 0.1, 0.05) == 0.0);
  ScalarField next = phi;
  next[0] = 0.1;
  // eps * |0.1 / dt|^2 * h^2 * dt
  CHECK(dissipation_increment(phi, next, 0.1, 0.05) == doctest::Approx(0.05 * 1.0 * 0.1).epsilon(1e-14));

  std::vector<StepRecord> recs(4);
  for (int k = 0; k < 4; ++k) {
    recs[k].t = 0.1 * (k + 1);
    recs[k].dt = 0.1;
    recs[k].lambda = k;
  }
  CHECK(lambda_l2(recs, 0.0, 1.0) == doctest::Approx(0.1 * (0 + 1 + 4 + 9)));
  CHECK(lambda_l2(recs, 0.15, 0.35) == doctest::Approx(0.1 * (1 + 4)));
  CHECK(lambda_mean(recs, 0.0, 0.4) == doctest::Approx(1.5));
  for (auto& r : recs) r.lambda = 0.0;
  CHECK(lambda_l2(recs, 0.0, 1.0) == 0.0);
}
