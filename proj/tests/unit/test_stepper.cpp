#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "pks/stepper.hpp"

using namespace pks;

namespace {

const double kR0 = 1.0 / std::sqrt(std::numbers::pi);

SimConfig disk_config(double eps, std::size_t n) {
  SimConfig c;
  c.epsilon = eps;
  c.grid = Grid(n, n, 2.0 / static_cast<double>(n));
  c.init.kind = ShapeKind::disks;
  c.init.balls = {Ball{{1.0, 1.0, 0.0}, kR0}};
  return c;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("config validation and default step") {
  SimConfig c = disk_config(0.04, 64);
  CHECK(c.effective_dt() == doctest::Approx(0.04 * 0.04 * 0.5 / 4));
  c.A = 0.6;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = disk_config(0.04, 64);
  c.epsilon = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = disk_config(0.04, 64);
  c.target_mass = 5.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = disk_config(0.04, 64);
  c.dt = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("initialize an area-one disk") {
  const Simulation sim(disk_config(0.04, 128));
  const SimState s = sim.initialize();
  CHECK(std::abs(integrate(s.rho) - 1.0) <= 1e-10);
  const StepRecord r = sim.record(s, nullptr, 0.0, 0.0);
  CHECK(std::abs(r.energy_J / 0.7911 - 1.0) < 0.10);
  CHECK(s.t == 0.0);
  CHECK(s.step_index == 0);
}

TEST_CASE("a disk larger than the box is infeasible") {
  SimConfig c = disk_config(0.04, 32);
  c.init.balls[0].radius = 1.5;  // area 7.07 > 4
  CHECK_THROWS_AS(Simulation(c).initialize(), InfeasibleMass);
}

TEST_CASE("the uniform state is a fixed point") {
  SimConfig c = disk_config(0.05, 16);
  const Simulation sim(c);
  SimState s;
  s.phi = ScalarField(c.grid, 0.25);  // 1 / |Omega|
  const auto [rho, solve] = rho_of_phi(s.phi, 1.0, sim.params());
  s.rho = rho;
  s.ell = solve.ell;
  for (double v : s.rho.values) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
  SimState next = s;
  for (int k = 0; k < 20; ++k) next = sim.step(next);
  for (std::size_t i = 0; i < next.phi.size(); ++i) CHECK(std::abs(next.phi[i] - 0.25) < 1e-14);
  CHECK(dissipation_increment(s.phi, sim.step(s).phi, c.effective_dt(), c.epsilon) < 1e-20);
}

TEST_CASE("stationary disk keeps its radius") {
  SimConfig c = disk_config(0.02, 256);
  c.dt = 0.02 * 0.02 / 4;
  const Simulation sim(c);
  SimState s = sim.initialize();
  const double r0 = interface_geometry(s.phi).radius;
  for (int k = 0; k < 100; ++k) {
    s = sim.step(s);
    CHECK(std::abs(integrate(s.rho) - 1.0) <= 1e-8);
  }
  CHECK(std::abs(interface_geometry(s.phi).radius - kR0) < 0.01 * kR0);
  CHECK(std::abs(interface_geometry(s.phi).radius - r0) < 0.01 * kR0);
  CHECK(s.step_index == 100);
  CHECK(s.t == doctest::Approx(100 * c.dt));
}

TEST_CASE("zero horizon gives the initial snapshot only") {
  SimConfig c = disk_config(0.08, 32);
  c.t_end = 0.0;
  const RunResult r = run(c);
  CHECK(r.records.empty());
  REQUIRE(r.snapshots.size() == 1);
  CHECK(r.snapshots[0].step_index == 0);
}

TEST_CASE("runs are bitwise deterministic and keep every invariant") {
  SimConfig c = disk_config(0.08, 64);
  c.init.kind = ShapeKind::perturbed_disk;
  c.init.center = {1.0, 1.0, 0.0};
  c.init.radius = 0.5;
  c.init.amplitude = 0.05;
  c.init.modes = {3, 5};
  c.init.seed = 12;
  c.t_end = 0.01;
  c.output_every = 10;
  const RunResult a = run(c);
  const RunResult b = run(c);
  REQUIRE(a.records.size() == b.records.size());
  CHECK(a.records.size() == static_cast<std::size_t>(std::ceil(0.01 / c.effective_dt() - 1e-9)));
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    CHECK(same_bits(a.records[k].energy_J, b.records[k].energy_J));
    CHECK(same_bits(a.records[k].ell, b.records[k].ell));
  }
  CHECK(a.snapshots.size() == 1 + a.records.size() / 10);
  for (const InvariantCheck* inv : a.invariants.all()) {
    CAPTURE(inv->name);
    CHECK(inv->passed);
    CHECK(inv->observations > 0);
  }
}

TEST_CASE("perturbation phases follow the seed") {
  InitShape s;
  s.kind = ShapeKind::perturbed_disk;
  s.seed = 4;
  const auto p1 = s.mode_phases();
  CHECK(p1 == s.mode_phases());
  s.seed = 5;
  CHECK(p1 != s.mode_phases());
  CHECK(p1.size() == 5);
}

TEST_CASE("two disks: the smaller one shrinks") {
  SimConfig c = disk_config(0.04, 128);
  c.init.balls = {Ball{{0.6, 0.6, 0.0}, 0.18}, Ball{{1.45, 1.45, 0.0}, 0.30}};
  scale_balls_to_volume(c.init, 1.0, 2);
  CHECK(c.init.enclosed_volume(2) == doctest::Approx(1.0));
  const Simulation sim(c);
  SimState s = sim.initialize();
  for (int k = 0; k < 50; ++k) s = sim.step(s);  // transient
  std::vector<double> small;
  for (int block = 0; block < 5; ++block) {
    for (int k = 0; k < 40; ++k) s = sim.step(s);
    const auto v = component_volumes(s.phi);
    REQUIRE(v.size() == 2);
    small.push_back(v[1]);
  }
  for (std::size_t k = 1; k < small.size(); ++k) CHECK(small[k] < small[k - 1]);
}

TEST_CASE("spectral and iterative steppers agree") {
  SimConfig c = disk_config(0.08, 48);
  const Simulation spectral(c);
  c.solver = SolverKind::iterative;
  const Simulation iterative(c);
  SimState a = spectral.initialize(), b = iterative.initialize();
  for (int k = 0; k < 10; ++k) {
    a = spectral.step(a);
    b = iterative.step(b);
  }
  CHECK(max_abs_difference(a.phi, b.phi) < 1e-8);
}

TEST_CASE("very large steps still decrease the energy") {
  // The implicit part is the convex half of the energy, so decay holds for any dt.
  SimConfig c = disk_config(0.04, 64);
  c.dt = 10.0 * c.epsilon * c.epsilon / c.A;
  c.t_end = 40 * c.dt;
  const RunResult r = run(c);
  CHECK(r.invariants.energy_decay.passed);
  CHECK(r.invariants.mass.passed);
}

TEST_CASE("three-dimensional ball") {
  SimConfig c;
  c.epsilon = 0.1;
  c.grid = Grid(24, 24, 24, 2.0 / 24);
  c.init.kind = ShapeKind::disks;
  c.init.balls = {Ball{{1.0, 1.0, 1.0}, std::cbrt(3.0 / (4.0 * std::numbers::pi))}};
  c.t_end = 5 * c.effective_dt();
  const RunResult r = run(c);
  CHECK(r.records.size() == 5);
  CHECK(std::abs(r.records.back().mass_rho - 1.0) < 1e-8);
  CHECK(r.invariants.energy_decay.passed);
  CHECK(r.records.back().radius_est == doctest::Approx(std::cbrt(3.0 / (4.0 * std::numbers::pi))).epsilon(0.05));
}

TEST_CASE("invariant check bookkeeping") {
  InvariantCheck c{"x"};
  c.observe(-1.0, 0);
  CHECK(c.passed);
  CHECK(c.worst == -1.0);
  c.observe(-2.0, 1);
  CHECK(c.worst == -1.0);
  c.observe(0.5, 2);
  c.observe(0.1, 3);
  CHECK_FALSE(c.passed);
  CHECK(c.violations == 2);
  CHECK(c.first_violation_step == 2);
  CHECK(c.worst == 0.5);
}
