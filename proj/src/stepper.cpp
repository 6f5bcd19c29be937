#include "pks/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace pks {

namespace {

double ball_volume(double r, int dim) {
  return dim == 3 ? 4.0 / 3.0 * std::numbers::pi * r * r * r : std::numbers::pi * r * r;
}

double distance(const std::array<double, 3>& a, const std::array<double, 3>& b, int dim) {
  double s = 0.0;
  for (int ax = 0; ax < dim; ++ax) s += (a[ax] - b[ax]) * (a[ax] - b[ax]);
  return std::sqrt(s);
}

std::vector<int> effective_modes(const InitShape& shape) {
  if (!shape.modes.empty()) return shape.modes;
  return {2, 3, 4, 5, 6};
}

}  // namespace

double InitShape::enclosed_volume(int dim) const {
  switch (kind) {
    case ShapeKind::disks: {
      double v = 0.0;
      for (const Ball& b : balls) v += ball_volume(b.radius, dim);
      return v;
    }
    case ShapeKind::annulus:
      return ball_volume(radius, dim) - ball_volume(inner_radius, dim);
    case ShapeKind::perturbed_disk: {
      // Distinct cosine modes are orthogonal: mean of R(theta)^2 is R^2 (1 + M a^2 / 2).
      const double m = static_cast<double>(effective_modes(*this).size());
      if (dim == 2) return std::numbers::pi * radius * radius * (1.0 + 0.5 * m * amplitude * amplitude);
      return ball_volume(radius, dim);
    }
  }
  return 0.0;
}

std::vector<double> InitShape::mode_phases() const {
  std::mt19937_64 gen(seed);
  std::vector<double> phases;
  for (std::size_t k = 0; k < effective_modes(*this).size(); ++k) {
    // 53 high bits -> [0,1); avoids the library-specific distribution classes.
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    phases.push_back(2.0 * std::numbers::pi * u);
  }
  return phases;
}

double InitShape::signed_distance(const std::array<double, 3>& x, int dim) const {
  switch (kind) {
    case ShapeKind::disks: {
      double s = -std::numeric_limits<double>::infinity();
      for (const Ball& b : balls) s = std::max(s, b.radius - distance(x, b.center, dim));
      return s;
    }
    case ShapeKind::annulus: {
      const double r = distance(x, center, dim);
      return std::min(radius - r, r - inner_radius);
    }
    case ShapeKind::perturbed_disk: {
      const double r = distance(x, center, dim);
      const double theta = std::atan2(x[1] - center[1], x[0] - center[0]);
      const auto modes = effective_modes(*this);
      const auto phases = mode_phases();
      double bump = 0.0;
      for (std::size_t k = 0; k < modes.size(); ++k) {
        bump += std::cos(static_cast<double>(modes[k]) * theta + phases[k]);
      }
      return radius * (1.0 + amplitude * bump) - r;
    }
  }
  return 0.0;
}

void scale_balls_to_volume(InitShape& shape, double target, int dim) {
  const double current = shape.enclosed_volume(dim);
  if (!(current > 0.0)) throw std::invalid_argument("scale_balls_to_volume: empty shape");
  const double factor = std::pow(target / current, 1.0 / dim);
  for (Ball& b : shape.balls) b.radius *= factor;
}

double SimConfig::effective_dt() const {
  if (dt > 0.0) return dt;
  return epsilon * epsilon * std::min(1.0, 2.0 * A) / 4.0;
}

void SimConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(A > 0.0 && A < 0.5)) throw std::invalid_argument("A must lie in (0, 1/2)");
  if (dt < 0.0 || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be nonnegative");
  if (!(target_mass > 0.0)) throw std::invalid_argument("target_mass must be positive");
  if (!(grid.volume() > target_mass)) {
    throw std::invalid_argument("grid volume must exceed target_mass");
  }
  if (output_every < 0) throw std::invalid_argument("output_every must be nonnegative");
  if (init.kind == ShapeKind::disks) {
    if (init.balls.empty()) throw std::invalid_argument("disks shape needs at least one disk");
    for (const Ball& b : init.balls) {
      if (!(b.radius > 0.0)) throw std::invalid_argument("disk radius must be positive");
    }
  } else if (!(init.radius > 0.0)) {
    throw std::invalid_argument("shape radius must be positive");
  }
  if (init.kind == ShapeKind::annulus && !(init.inner_radius > 0.0 && init.inner_radius < init.radius)) {
    throw std::invalid_argument("annulus needs 0 < inner_radius < radius");
  }
}

void InvariantCheck::observe(double excess, long step) {
  worst = observations == 0 ? excess : std::max(worst, excess);
  ++observations;
  if (excess > 0.0 || std::isnan(excess)) {
    ++violations;
    passed = false;
    if (first_violation_step < 0) first_violation_step = step;
  }
}

std::vector<const InvariantCheck*> InvariantLedger::all() const {
  return {&mass,     &energy_identity,  &energy_decay,         &dissipation,
          &boundedness, &phase_separation, &forcing_localization, &young};
}

bool InvariantLedger::all_passed() const {
  const auto checks = all();
  return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck* c) { return c->passed; });
}

Simulation::Simulation(SimConfig config)
    : config_((config.validate(), std::move(config))),
      params_(config_.A),
      solver_(config_.grid, config_.solver),
      truncation_(std::make_shared<TruncationTable>(params_)) {}

SimState Simulation::initialize() const {
  const Grid& g = config_.grid;
  const int dim = g.dim();
  const double shape_volume = config_.init.enclosed_volume(dim);
  if (!(shape_volume < g.volume())) {
    std::ostringstream msg;
    msg << "initial shape volume " << shape_volume << " does not fit in |Omega| = " << g.volume();
    throw InfeasibleMass(msg.str());
  }
  const OptimalProfile profile(params_);
  SimState state;
  state.phi = ScalarField(g, 0.0);
  for (std::size_t k = 0; k < g.nz; ++k) {
    for (std::size_t j = 0; j < g.ny; ++j) {
      for (std::size_t i = 0; i < g.nx; ++i) {
        const double s = config_.init.signed_distance(g.center(i, j, k), dim);
        state.phi[g.index(i, j, k)] = profile(s / config_.epsilon);
      }
    }
  }
  auto [rho, solve] = rho_of_phi(state.phi, config_.target_mass, params_);
  state.rho = std::move(rho);
  state.ell = solve.ell;
  return state;
}

SimState Simulation::step(const SimState& state) const {
  const double dt = config_.effective_dt();
  const double inv_eps2 = 1.0 / (config_.epsilon * config_.epsilon);
  ScalarField rhs(state.phi.grid, 0.0);
  for (std::size_t n = 0; n < rhs.size(); ++n) {
    rhs[n] = state.phi[n] / dt + inv_eps2 * state.rho[n];
  }
  SimState next;
  next.phi = solver_.solve(rhs, 1.0 / dt, inv_eps2);
  auto [rho, solve] = rho_of_phi(next.phi, config_.target_mass, params_);
  next.rho = std::move(rho);
  next.ell = solve.ell;
  next.step_index = state.step_index + 1;
  next.t = static_cast<double>(next.step_index) * dt;
  return next;
}

StepRecord Simulation::record(const SimState& state, const SimState* previous,
                              double dissipation_cum, double forcing_cum) const {
  const double eps = config_.epsilon;
  StepRecord r;
  r.t = state.t;
  r.dt = previous != nullptr ? state.t - previous->t : 0.0;
  r.ell = state.ell;
  r.lambda = state.ell / (params_.gamma() * eps);
  const EnergyPair energy =
      energy_J(state.phi, state.rho, state.ell, eps, params_, config_.target_mass,
               std::numeric_limits<double>::infinity());
  r.energy_J = energy.squared_form;
  r.energy_J_alt = energy.conjugate_form;
  r.dissipation = previous != nullptr ? dissipation_increment(previous->phi, state.phi, r.dt, eps) : 0.0;
  r.dissipation_cum = dissipation_cum + r.dissipation;
  r.mass_rho = integrate(state.rho);
  const ScalarField forcing = forcing_field(state.phi, state.ell, eps, params_);
  r.forcing_l2 = forcing_l2_rate(forcing, eps);
  r.forcing_l2_cum = forcing_cum + r.dt * r.forcing_l2;
  r.forcing_localized = forcing_is_localized(state.phi, forcing, state.ell, params_);
  const InterfaceGeometry geom = interface_geometry(state.phi);
  r.area_over_half = geom.area_over_half;
  r.perimeter_ms = geom.perimeter;
  r.radius_est = geom.radius;
  const auto [lo, hi] = std::minmax_element(state.phi.values.begin(), state.phi.values.end());
  r.phi_min = *lo;
  r.phi_max = *hi;
  const double mismatch = l2_distance(state.phi, state.rho);
  r.mismatch_l2_sq = mismatch * mismatch;
  r.transition_fraction = transition_fraction(state.phi, params_);
  r.modica_mortola = modica_mortola_energy(state.phi, eps, params_);
  r.bv_psi = bv_seminorm(truncation_psi(state.phi, *truncation_));
  return r;
}

RunResult Simulation::run(RunObserver& observer, MonitorTolerances tol) const {
  RunResult result;
  SimState state = initialize();
  result.initial = record(state, nullptr, 0.0, 0.0);
  result.initial_energy = result.initial.energy_J;
  result.phi_upper_bound = std::max(1.0, result.initial.phi_max);
  observer.on_initial(state, result.initial);
  observer.on_snapshot(state);

  const double j0 = result.initial_energy;
  const double dt = config_.effective_dt();
  const long steps = config_.t_end > 0.0
                         ? static_cast<long>(std::ceil(config_.t_end / dt - 1e-9))
                         : 0;
  InvariantLedger& inv = result.invariants;
  auto check_state = [&](const StepRecord& r, long n) {
    inv.mass.observe(std::abs(r.mass_rho - config_.target_mass) - tol.mass, n);
    inv.energy_identity.observe(
        std::abs(r.energy_J - r.energy_J_alt) / std::max(std::abs(r.energy_J), 1e-300) -
            tol.energy_identity,
        n);
    inv.boundedness.observe(std::max(-r.phi_min - tol.boundedness,
                                     r.phi_max - result.phi_upper_bound - tol.boundedness),
                            n);
    inv.phase_separation.observe(r.mismatch_l2_sq - 2.0 * config_.epsilon * r.energy_J, n);
    inv.forcing_localization.observe(r.forcing_localized ? -1.0 : 1.0, n);
    inv.young.observe(r.bv_psi - (1.0 + tol.young) * r.modica_mortola / params_.gamma(), n);
  };
  check_state(result.initial, 0);

  double previous_energy = j0;
  for (long n = 1; n <= steps; ++n) {
    SimState next = step(state);
    const StepRecord& last = result.records.empty() ? result.initial : result.records.back();
    StepRecord r = record(next, &state, last.dissipation_cum, last.forcing_l2_cum);
    check_state(r, n);
    inv.energy_decay.observe(r.energy_J - previous_energy - tol.energy_decay * j0, n);
    inv.dissipation.observe(r.energy_J + 0.5 * r.dissipation_cum - j0 * (1.0 + tol.dissipation), n);
    previous_energy = r.energy_J;
    result.records.push_back(r);
    observer.on_record(r);
    state = std::move(next);
    if (config_.output_every > 0 && n % config_.output_every == 0) observer.on_snapshot(state);
  }
  observer.on_final(state);
  return result;
}

RunResult Simulation::run(MonitorTolerances tol) const {
  struct Collector : RunObserver {
    std::vector<SimState> snapshots;
    void on_snapshot(const SimState& s) override { snapshots.push_back(s); }
  } collector;
  RunResult result = run(collector, tol);
  result.snapshots = std::move(collector.snapshots);
  return result;
}

SimState initialize(const SimConfig& config) { return Simulation(config).initialize(); }

SimState step(const SimState& state, const SimConfig& config) {
  return Simulation(config).step(state);
}

RunResult run(const SimConfig& config) { return Simulation(config).run(); }

}  // namespace pks
