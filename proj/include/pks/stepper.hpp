#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pks/diagnostics.hpp"
#include "pks/field.hpp"
#include "pks/helmholtz.hpp"
#include "pks/potentials.hpp"
#include "pks/rho_solver.hpp"

namespace pks {

/// A ball (disk in 2D) with center and radius.
struct Ball {
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double radius = 0.0;
};

enum class ShapeKind { disks, annulus, perturbed_disk };

/// Initial interface. Signed distance is positive inside.
struct InitShape {
  ShapeKind kind = ShapeKind::disks;
  std::vector<Ball> balls;            // disks: one or more disjoint balls
  std::array<double, 3> center{1.0, 1.0, 1.0};  // annulus / perturbed disk
  double radius = 0.5;                // perturbed disk mean radius; annulus outer radius
  double inner_radius = 0.25;         // annulus
  double amplitude = 0.0;             // perturbed disk: relative amplitude of each mode
  std::vector<int> modes;             // perturbed disk Fourier modes (empty: 2..6)
  std::uint64_t seed = 1;

  /// Enclosed measure of {signed_distance > 0} in free space.
  double enclosed_volume(int dim) const;
  double signed_distance(const std::array<double, 3>& x, int dim) const;

  /// Phases drawn from the seed; deterministic.
  std::vector<double> mode_phases() const;
};

struct SimConfig {
  double epsilon = 0.04;
  double A = 0.25;
  double dt = 0.0;  // 0 selects the default eps^2 min(1, 2A) / 4
  double t_end = 0.0;
  Grid grid{128, 128, 2.0 / 128};
  InitShape init;
  double target_mass = 1.0;
  int output_every = 0;  // 0 disables periodic snapshots
  SolverKind solver = SolverKind::spectral;

  double effective_dt() const;
  void validate() const;  // throws std::invalid_argument
};

struct SimState {
  double t = 0.0;
  ScalarField phi;
  ScalarField rho;
  double ell = 0.0;
  long step_index = 0;
};

/// One monitored invariant, evaluated every step. Flags come from the
/// diagnostics only, never set by hand.
struct InvariantCheck {
  std::string name;
  bool passed = true;
  long violations = 0;
  double worst = 0.0;  // largest excess over the threshold; <= 0 while passing
  long observations = 0;
  long first_violation_step = -1;

  void observe(double excess, long step);
};

/// Per-run monitor of every invariant the stepper promises.
struct InvariantLedger {
  InvariantCheck mass{"mass"};
  InvariantCheck energy_identity{"energy_identity"};
  InvariantCheck energy_decay{"energy_decay"};
  InvariantCheck dissipation{"dissipation_inequality"};
  InvariantCheck boundedness{"boundedness"};
  InvariantCheck phase_separation{"phase_separation"};
  InvariantCheck forcing_localization{"forcing_localization"};
  InvariantCheck young{"young_bv_bound"};

  std::vector<const InvariantCheck*> all() const;
  bool all_passed() const;
};

/// Tolerances of the monitored invariants.
struct MonitorTolerances {
  double mass = 1e-8;
  double energy_identity = 1e-10;   // relative
  double energy_decay = 1e-6;       // times J(phi_in), per step
  double dissipation = 1e-4;        // relative to J(phi_in), whole run
  double boundedness = 1e-10;
  double young = 2e-2;              // relative slack of bv(psi) <= integral of mu
};

/// Receives records and snapshots as the run progresses.
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void on_initial(const SimState&, const StepRecord&) {}
  virtual void on_record(const StepRecord&) {}
  virtual void on_snapshot(const SimState&) {}
  virtual void on_final(const SimState&) {}
};

struct RunResult {
  StepRecord initial;
  std::vector<StepRecord> records;
  std::vector<SimState> snapshots;  // filled only by run(config) without observer
  InvariantLedger invariants;
  double initial_energy = 0.0;
  double phi_upper_bound = 1.0;  // bound monitored by the boundedness check
};

/// Semi-implicit stepper for d_t phi = Delta phi + eps^-2 (rho_phi - phi).
///
/// Diffusion and -eps^-2 phi are implicit, rho_phi explicit. This is the
/// convex-concave splitting of J_eps, so the discrete energy is nonincreasing
/// for every dt; the run still monitors it.
class Simulation {
 public:
  explicit Simulation(SimConfig config);

  /// Builds phi_in = q(s(x)/eps) and solves for (rho, ell).
  /// Throws InfeasibleMass if the shape or the target mass does not fit in Omega.
  SimState initialize() const;

  SimState step(const SimState& state) const;

  /// Advances until t >= t_end, reporting to the observer. Monitors invariants.
  RunResult run(RunObserver& observer, MonitorTolerances tol = {}) const;
  /// Same, keeping records and snapshots in memory.
  RunResult run(MonitorTolerances tol = {}) const;

  StepRecord record(const SimState& state, const SimState* previous, double dissipation_cum,
                    double forcing_cum) const;

  const SimConfig& config() const { return config_; }
  const PotentialParams& params() const { return params_; }

 private:
  SimConfig config_;
  PotentialParams params_;
  HelmholtzSolver solver_;
  std::shared_ptr<const TruncationTable> truncation_;
};

SimState initialize(const SimConfig& config);
SimState step(const SimState& state, const SimConfig& config);
RunResult run(const SimConfig& config);

/// Scales the balls of a disks shape so that their enclosed volume equals target.
void scale_balls_to_volume(InitShape& shape, double target, int dim);

}  // namespace pks
