#include "pks/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "pks/diagnostics.hpp"
#include "pks/io.hpp"
#include "pks/mcf_oracle.hpp"
#include "pks/stepper.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace pks::cli {

namespace {

std::ostream& log_of(const CommandOptions& opts) { return opts.log != nullptr ? *opts.log : std::cerr; }

std::string iso_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Collects timestamps and the file inventory of one command.
class Manifest {
 public:
  Manifest(std::string command, bool normalize)
      : command_(std::move(command)), normalize_(normalize), start_(iso_now()),
        clock_(std::chrono::steady_clock::now()) {}

  void echo(const io::KeyValueConfig& cfg) {
    for (const auto& [key, entry] : cfg.entries()) config_[key] = entry.first;
  }
  void set(const std::string& key, ordered_json value) { extra_[key] = std::move(value); }

  void write(const fs::path& dir, int exit_code) const {
    ordered_json j;
    j["command"] = command_;
    j["code_version"] = PKS_VERSION;
    j["config"] = config_;
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_).count();
    j["start_time"] = normalize_ ? "normalized" : start_;
    j["end_time"] = normalize_ ? "normalized" : iso_now();
    j["wall_seconds"] = normalize_ ? 0.0 : wall;
    for (const auto& [key, value] : extra_.items()) j[key] = value;
    j["exit_code"] = exit_code;
    ordered_json files = ordered_json::array();
    std::vector<fs::path> paths;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().filename() != "manifest.json") {
        paths.push_back(fs::relative(entry.path(), dir));
      }
    }
    std::sort(paths.begin(), paths.end());
    for (const fs::path& p : paths) {
      files.push_back({{"path", p.generic_string()}, {"bytes", fs::file_size(dir / p)}});
    }
    j["files"] = files;
    std::ofstream(dir / "manifest.json") << j.dump(2) << '\n';
  }

 private:
  std::string command_;
  bool normalize_;
  std::string start_;
  std::chrono::steady_clock::time_point clock_;
  ordered_json config_ = ordered_json::object();
  ordered_json extra_ = ordered_json::object();
};

ordered_json invariants_json(const InvariantLedger& ledger) {
  ordered_json j = ordered_json::object();
  for (const InvariantCheck* c : ledger.all()) {
    j[c->name] = {{"passed", c->passed},
                  {"violations", c->violations},
                  {"worst_excess", c->worst},
                  {"first_violation_step", c->first_violation_step}};
  }
  return j;
}

std::string snapshot_name(const std::string& field, long step) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s_%08ld.snap", field.c_str(), step);
  return buf;
}

/// Streams records and snapshots of one run into its output directory.
class FileObserver : public RunObserver {
 public:
  FileObserver(const fs::path& dir, const io::RunSettings& rs) : dir_(dir), rs_(rs) {
    fs::create_directories(dir_ / "snapshots");
    csv_.open(dir_ / "records.csv");
    csv_ << io::records_header() << '\n';
  }

  void on_record(const StepRecord& r) override { csv_ << io::format_record(r) << '\n'; }

  void on_snapshot(const SimState& s) override {
    write(s);
    last_written_ = s.step_index;
  }

  void on_final(const SimState& s) override {
    if (s.step_index != last_written_) write(s);
    final_ = s;
    csv_.flush();
  }

  const SimState& final_state() const { return final_; }

 private:
  void write(const SimState& s) {
    const SimConfig& c = rs_.sim;
    io::Snapshot snap{"phi", s.phi, s.t, c.epsilon, c.A, c.target_mass};
    io::write_snapshot(dir_ / "snapshots" / snapshot_name("phi", s.step_index), snap,
                       rs_.snapshot_format);
    snap.name = "rho";
    snap.field = s.rho;
    io::write_snapshot(dir_ / "snapshots" / snapshot_name("rho", s.step_index), snap,
                       rs_.snapshot_format);
  }

  fs::path dir_;
  const io::RunSettings& rs_;
  std::ofstream csv_;
  long last_written_ = -1;
  SimState final_;
};

struct RunSummary {
  int exit_code = ExitCode::ok;
  std::string status = "ok";
  RunResult result;
  SimState final_state;
};

double ball_radius(double volume, int dim) {
  return dim == 3 ? std::cbrt(3.0 * volume / (4.0 * std::numbers::pi))
                  : std::sqrt(volume / std::numbers::pi);
}

/// Runs one parsed configuration into `dir`. Never throws for solver or I/O trouble.
RunSummary simulate_into(const io::KeyValueConfig& cfg, const io::RunSettings& rs,
                         const fs::path& dir, bool normalize, std::ostream& log) {
  RunSummary out;
  Manifest manifest("simulate", normalize);
  io::KeyValueConfig echo = cfg;
  echo.set("out_dir", dir.generic_string());
  manifest.echo(echo);
  manifest.set("effective_dt", rs.sim.effective_dt());
  try {
    fs::create_directories(dir);
    FileObserver observer(dir, rs);
    out.result = Simulation(rs.sim).run(observer);
    out.final_state = observer.final_state();
    manifest.set("initial_energy", out.result.initial_energy);
    manifest.set("invariants", invariants_json(out.result.invariants));
    for (const InvariantCheck* c : out.result.invariants.all()) {
      if (!c->passed) {
        log << "invariant violated: " << c->name << " (" << c->violations
            << " steps, first at step " << c->first_violation_step << ", worst excess "
            << io::format_double(c->worst) << ")\n";
      }
    }
    if (!out.result.invariants.all_passed()) {
      out.exit_code = ExitCode::invariant_violation;
      out.status = "invariant_violation";
    }
  } catch (const InfeasibleMass& e) {
    log << "solver failure: " << e.what() << '\n';
    out.exit_code = ExitCode::solver_failure;
    out.status = "solver_failure";
  } catch (const SolverError& e) {
    log << "solver failure: " << e.what() << '\n';
    out.exit_code = ExitCode::solver_failure;
    out.status = "solver_failure";
  } catch (const std::runtime_error& e) {
    log << "solver failure: " << e.what() << '\n';
    out.exit_code = ExitCode::solver_failure;
    out.status = "solver_failure";
  }
  manifest.set("status", out.status);
  manifest.write(dir, out.exit_code);
  return out;
}

/// Largest relative radius error of the final state against the circle ODE,
/// matching components by size. NaN when the shape is not a set of disks.
double radius_error_vs_oracle(const io::RunSettings& rs, const SimState& final_state) {
  const SimConfig& c = rs.sim;
  if (c.init.kind != ShapeKind::disks || final_state.phi.size() == 0) return std::nan("");
  const int dim = c.grid.dim();
  mcf::CircleSystem sys;
  sys.d = dim;
  for (const Ball& b : c.init.balls) {
    sys.radii.push_back(b.radius);
    sys.centers.push_back(b.center);
  }
  const double dt = c.effective_dt();
  const mcf::CircleTrajectory traj = mcf::integrate_circles(sys, dt, c.t_end);
  std::vector<double> expected = mcf::radii_at(traj, c.t_end);
  std::erase_if(expected, [&](double r) { return !(r > traj.stop_threshold); });
  std::sort(expected.rbegin(), expected.rend());
  const std::vector<double> volumes = component_volumes(final_state.phi);
  double worst = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double measured = i < volumes.size() ? ball_radius(volumes[i], dim) : 0.0;
    worst = std::max(worst, std::abs(measured - expected[i]) / expected[i]);
  }
  return worst;
}

unsigned env_thread_cap() {
  const char* env = std::getenv("PKS_THREADS");
  if (env == nullptr) return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  return (end != env && v > 0) ? static_cast<unsigned>(v) : 0;
}

std::string csv_number(double v) { return std::isfinite(v) ? io::format_double(v) : "nan"; }

std::string eps_label(double eps) {
  std::string s = io::format_double(eps);
  // Shortest form that still parses back to the same value keeps names readable.
  for (int digits = 1; digits <= 17; ++digits) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, eps);
    if (std::strtod(buf, nullptr) == eps) {
      s = buf;
      break;
    }
  }
  return s;
}

// ---- oracle -------------------------------------------------------------------

mcf::Point read_point(const io::KeyValueConfig& cfg, const std::string& key, mcf::Point fallback) {
  if (!cfg.has(key)) return fallback;
  const auto v = cfg.get_list(key);
  if (v.size() != 2) throw io::ConfigError("key '" + key + "' needs two coordinates", cfg.line_of(key));
  return {v[0], v[1]};
}

double positive_key(const io::KeyValueConfig& cfg, const std::string& key) {
  const double v = cfg.get_double(key);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw io::ConfigError("key '" + key + "' must be positive", cfg.line_of(key));
  }
  return v;
}

double nonnegative_key(const io::KeyValueConfig& cfg, const std::string& key) {
  const double v = cfg.get_double(key);
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw io::ConfigError("key '" + key + "' must be nonnegative", cfg.line_of(key));
  }
  return v;
}

void write_plot_script(const fs::path& path, const std::string& trajectory_csv,
                       const std::vector<std::string>& polygon_csvs) {
  std::ofstream py(path);
  py << "import csv\nimport matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n"
     << "def load(name):\n    with open(name) as f:\n        rows = list(csv.reader(f))\n"
     << "    return rows[0], [[float(x) for x in r] for r in rows[1:]]\n\n"
     << "header, rows = load('" << trajectory_csv << "')\n"
     << "fig, ax = plt.subplots()\n"
     << "for k in range(1, len(header) - 1):\n"
     << "    ax.plot([r[0] for r in rows], [r[k] for r in rows], label=header[k])\n"
     << "ax.set_xlabel('t')\nax.set_ylabel('radius')\nax.legend()\n"
     << "fig.savefig('" << fs::path(trajectory_csv).stem().string() << ".png')\n";
  for (const std::string& name : polygon_csvs) {
    py << "\n_, rows = load('" << name << "')\n"
       << "fig, ax = plt.subplots()\n"
       << "times = sorted(set(r[0] for r in rows))\n"
       << "for t in times:\n"
       << "    pts = [r for r in rows if r[0] == t]\n"
       << "    ax.plot([p[1] for p in pts] + [pts[0][1]], [p[2] for p in pts] + [pts[0][2]])\n"
       << "ax.set_aspect('equal')\n"
       << "fig.savefig('" << fs::path(name).stem().string() << ".png')\n";
  }
}

int oracle_circles(const io::KeyValueConfig& cfg, const fs::path& dir, Manifest& manifest,
                   std::ostream& log) {
  cfg.reject_unknown({"kind", "d", "radii", "centers", "dt", "t_end", "output_every", "out_dir"});
  mcf::CircleSystem sys;
  sys.d = static_cast<int>(cfg.get_long("d", 2));
  if (sys.d != 2 && sys.d != 3) throw io::ConfigError("d must be 2 or 3", cfg.line_of("d"));
  sys.radii = cfg.get_list("radii");
  if (sys.radii.empty()) throw io::ConfigError("radii is empty", cfg.line_of("radii"));
  for (double r : sys.radii) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw io::ConfigError("radii must be positive", cfg.line_of("radii"));
    }
  }
  sys.centers.assign(sys.radii.size(), {0.0, 0.0, 0.0});
  const double dt = positive_key(cfg, "dt");
  const double t_end = nonnegative_key(cfg, "t_end");
  const long every = cfg.get_long("output_every", 1);
  if (every < 1) throw io::ConfigError("output_every must be at least 1", cfg.line_of("output_every"));

  const mcf::CircleTrajectory traj = mcf::integrate_circles(sys, dt, t_end);
  std::ofstream csv(dir / "circles.csv");
  csv << 't';
  for (std::size_t i = 0; i < sys.radii.size(); ++i) csv << ",R_" << (i + 1);
  csv << ",Lambda\n";
  for (std::size_t n = 0; n < traj.times.size(); ++n) {
    if (n % static_cast<std::size_t>(every) != 0 && n + 1 != traj.times.size()) continue;
    csv << io::format_double(traj.times[n]);
    for (double r : traj.radii[n]) csv << ',' << io::format_double(r);
    csv << ',' << io::format_double(traj.lambda[n]) << '\n';
  }
  csv.close();
  write_plot_script(dir / "plot.py", "circles.csv", {});
  manifest.set("stopped_early", traj.stopped_early);
  manifest.set("volume_drift", traj.volume_drift);
  if (traj.stopped_early) log << "a circle reached the disappearance threshold; trajectory stops\n";
  return ExitCode::ok;
}

int oracle_front(const io::KeyValueConfig& cfg, const fs::path& dir, Manifest& manifest,
                 std::ostream& log) {
  cfg.reject_unknown({"kind", "shape", "center", "radius", "a", "b", "circles", "nodes", "dt",
                      "t_end", "output_every", "out_dir"});
  const long nodes = cfg.get_long("nodes", 128);
  if (nodes < 8) throw io::ConfigError("nodes must be at least 8", cfg.line_of("nodes"));
  const std::string shape = cfg.require("shape");
  mcf::FrontSystem fronts;
  const mcf::Point center = read_point(cfg, "center", {0.0, 0.0});
  const auto n = static_cast<std::size_t>(nodes);
  if (shape == "circle") {
    fronts.curves.push_back(mcf::make_circle_front(center, positive_key(cfg, "radius"), n));
  } else if (shape == "ellipse") {
    fronts.curves.push_back(
        mcf::make_ellipse_front(center, positive_key(cfg, "a"), positive_key(cfg, "b"), n));
  } else if (shape == "circles") {
    const auto v = cfg.get_list("circles");
    if (v.empty() || v.size() % 3 != 0) {
      throw io::ConfigError("circles needs 'x, y, r' triples separated by ';'", cfg.line_of("circles"));
    }
    for (std::size_t k = 0; k < v.size(); k += 3) {
      if (!(v[k + 2] > 0.0)) throw io::ConfigError("circle radius must be positive", cfg.line_of("circles"));
      fronts.curves.push_back(mcf::make_circle_front({v[k], v[k + 1]}, v[k + 2], n));
    }
  } else {
    throw io::ConfigError("shape must be circle, ellipse or circles", cfg.line_of("shape"));
  }
  const double t_end = nonnegative_key(cfg, "t_end");
  const double dt = cfg.has("dt") ? positive_key(cfg, "dt") : mcf::stable_front_dt(fronts);
  const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  const long every = cfg.get_long("output_every", std::max(1L, steps / 20));
  if (every < 1) throw io::ConfigError("output_every must be at least 1", cfg.line_of("output_every"));

  std::ofstream traj(dir / "front_trajectory.csv");
  traj << 't';
  for (std::size_t i = 0; i < fronts.curves.size(); ++i) traj << ",R_" << (i + 1);
  traj << ",Lambda\n";
  std::vector<std::string> polygon_names;
  std::vector<std::ofstream> polygons;
  for (std::size_t i = 0; i < fronts.curves.size(); ++i) {
    polygon_names.push_back(fronts.curves.size() == 1 ? "front_polygons.csv"
                                                      : "front_polygons_" + std::to_string(i + 1) + ".csv");
    polygons.emplace_back(dir / polygon_names.back());
    polygons.back() << "t,x,y\n";
  }
  auto emit = [&](double t, double lambda, bool polygon) {
    traj << io::format_double(t);
    for (const mcf::FrontCurve& c : fronts.curves) {
      traj << ',' << io::format_double(std::sqrt(std::max(c.area(), 0.0) / std::numbers::pi));
    }
    traj << ',' << io::format_double(lambda) << '\n';
    if (!polygon) return;
    for (std::size_t i = 0; i < fronts.curves.size(); ++i) {
      for (const mcf::Point& p : fronts.curves[i].nodes) {
        polygons[i] << io::format_double(t) << ',' << io::format_double(p[0]) << ','
                    << io::format_double(p[1]) << '\n';
      }
    }
  };
  const double area0 = fronts.total_area();
  int code = ExitCode::ok;
  double lambda = 0.0;
  emit(0.0, lambda, true);
  for (long k = 1; k <= steps; ++k) {
    try {
      fronts = mcf::front_track_step(fronts, dt, &lambda);
    } catch (const mcf::TopologyChange& e) {
      log << "front tracking stopped at step " << k << ": " << e.what() << '\n';
      code = ExitCode::solver_failure;
      break;
    }
    const double t = static_cast<double>(k) * dt;
    emit(t, lambda, k % every == 0 || k == steps);
  }
  traj.close();
  for (auto& p : polygons) p.close();
  write_plot_script(dir / "plot.py", "front_trajectory.csv", polygon_names);
  manifest.set("area_drift", std::abs(fronts.total_area() - area0) / area0);
  if (fronts.curves.size() == 1) {
    manifest.set("isoperimetric_ratio", fronts.curves[0].isoperimetric_ratio());
  }
  manifest.set("dt", dt);
  return code;
}

}  // namespace

unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const unsigned cap = env_thread_cap(); cap > 0) n = cap;
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

int cmd_simulate(const fs::path& config, const CommandOptions& opts) {
  std::ostream& log = log_of(opts);
  io::KeyValueConfig cfg;
  io::RunSettings rs;
  try {
    cfg = io::KeyValueConfig::parse_file(config);
    rs = io::settings_from(cfg);
  } catch (const io::ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  }
  const fs::path dir = opts.out_dir.value_or(rs.out_dir);
  return simulate_into(cfg, rs, dir, opts.normalize_manifest, log).exit_code;
}

int cmd_sweep(const fs::path& config, const std::vector<double>& eps_list, const CommandOptions& opts) {
  std::ostream& log = log_of(opts);
  if (eps_list.empty()) {
    log << "config error: sweep needs at least one epsilon (--eps)\n";
    return ExitCode::config_error;
  }
  io::KeyValueConfig base;
  io::RunSettings base_rs;
  std::vector<io::KeyValueConfig> member_cfg;
  std::vector<io::RunSettings> member_rs;
  try {
    base = io::KeyValueConfig::parse_file(config);
    base_rs = io::settings_from(base);
    for (double eps : eps_list) {
      if (!(eps > 0.0)) throw io::ConfigError("sweep epsilon values must be positive");
      io::KeyValueConfig c = base;
      c.set("epsilon", eps_label(eps));
      member_rs.push_back(io::settings_from(c));
      member_cfg.push_back(std::move(c));
    }
  } catch (const io::ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  }
  const fs::path root = opts.out_dir.value_or(base_rs.out_dir);
  fs::create_directories(root);

  const std::size_t jobs = eps_list.size();
  std::vector<RunSummary> summaries(jobs);
  std::vector<std::ostringstream> logs(jobs);
  std::vector<double> radius_error(jobs, std::nan(""));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < jobs; k = next++) {
      const fs::path dir = root / ("eps_" + eps_label(eps_list[k]));
      summaries[k] = simulate_into(member_cfg[k], member_rs[k], dir, opts.normalize_manifest, logs[k]);
      if (summaries[k].exit_code != ExitCode::solver_failure) {
        radius_error[k] = radius_error_vs_oracle(member_rs[k], summaries[k].final_state);
      }
      summaries[k].final_state = SimState{};
    }
  };
  std::vector<std::thread> pool;
  const unsigned workers = worker_count(jobs);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  const double gamma = PotentialParams(base_rs.sim.A).gamma();
  std::ofstream csv(root / "sweep.csv");
  csv << "eps,status,exit_code,lambda_l2,forcing_l2_cum,energy_ratio,radius_error\n";
  int worst = ExitCode::ok;
  for (std::size_t k = 0; k < jobs; ++k) {
    const RunSummary& s = summaries[k];
    log << logs[k].str();
    double lam = std::nan(""), forcing = std::nan(""), ratio = std::nan("");
    if (s.exit_code != ExitCode::solver_failure) {
      const std::vector<StepRecord>& recs = s.result.records;
      const StepRecord& last = recs.empty() ? s.result.initial : recs.back();
      lam = lambda_l2(recs, 0.0, member_rs[k].sim.t_end);
      forcing = last.forcing_l2_cum;
      ratio = last.energy_J / (gamma * last.perimeter_ms);
    }
    csv << eps_label(eps_list[k]) << ',' << s.status << ',' << s.exit_code << ',' << csv_number(lam)
        << ',' << csv_number(forcing) << ',' << csv_number(ratio) << ','
        << csv_number(radius_error[k]) << '\n';
    worst = std::max(worst, s.exit_code);
  }
  return worst;
}

int cmd_oracle(const fs::path& config, const CommandOptions& opts) {
  std::ostream& log = log_of(opts);
  Manifest manifest("oracle", opts.normalize_manifest);
  try {
    const io::KeyValueConfig cfg = io::KeyValueConfig::parse_file(config);
    const std::string kind = cfg.require("kind");
    const fs::path dir = opts.out_dir.value_or(cfg.get("out_dir").value_or("out"));
    io::KeyValueConfig echo = cfg;
    echo.set("out_dir", dir.generic_string());
    manifest.echo(echo);
    int code = ExitCode::ok;
    if (kind == "circles") {
      fs::create_directories(dir);
      code = oracle_circles(cfg, dir, manifest, log);
    } else if (kind == "front") {
      fs::create_directories(dir);
      code = oracle_front(cfg, dir, manifest, log);
    } else {
      throw io::ConfigError("kind must be circles or front", cfg.line_of("kind"));
    }
    manifest.write(dir, code);
    return code;
  } catch (const io::ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  } catch (const mcf::DegenerateCircle& e) {
    log << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  }
}

int cmd_diagnose(const fs::path& snapshot, const CommandOptions& opts) {
  std::ostream& log = log_of(opts);
  io::Snapshot snap;
  try {
    snap = io::read_snapshot(snapshot);
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  }
  if (snap.name != "phi") {
    log << "config error: diagnose needs a phi snapshot, got " << snap.name << '\n';
    return ExitCode::config_error;
  }
  ordered_json j;
  try {
    const PotentialParams p(snap.A);
    const auto [rho, solve] = rho_of_phi(snap.field, snap.target_mass, p);
    const EnergyPair energy = energy_J(snap.field, rho, solve.ell, snap.epsilon, p, snap.target_mass);
    const InterfaceGeometry geom = interface_geometry(snap.field);
    const ScalarField forcing = forcing_field(snap.field, solve.ell, snap.epsilon, p);
    const auto [lo, hi] = std::minmax_element(snap.field.values.begin(), snap.field.values.end());
    const double mismatch = l2_distance(snap.field, rho);
    std::vector<double> radii;
    for (double v : component_volumes(snap.field)) radii.push_back(ball_radius(v, snap.field.grid.dim()));
    j["t"] = snap.t;
    j["epsilon"] = snap.epsilon;
    j["A"] = snap.A;
    j["ell"] = solve.ell;
    j["lambda"] = solve.ell / (p.gamma() * snap.epsilon);
    j["energy_J"] = energy.squared_form;
    j["energy_J_alt"] = energy.conjugate_form;
    j["modica_mortola"] = modica_mortola_energy(snap.field, snap.epsilon, p);
    j["bv_psi"] = bv_seminorm(truncation_psi(snap.field, p));
    j["mass_rho"] = integrate(rho);
    j["area"] = geom.area_over_half;
    j["perimeter"] = geom.perimeter;
    j["radius"] = geom.radius;
    j["component_radii"] = radii;
    j["phi_min"] = *lo;
    j["phi_max"] = *hi;
    j["mismatch_l2_sq"] = mismatch * mismatch;
    j["transition_fraction"] = transition_fraction(snap.field, p);
    j["forcing_l2"] = forcing_l2_rate(forcing, snap.epsilon);
    j["forcing_localized"] = forcing_is_localized(snap.field, forcing, solve.ell, p);
  } catch (const std::domain_error& e) {
    log << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  } catch (const std::runtime_error& e) {
    log << "solver failure: " << e.what() << '\n';
    return ExitCode::solver_failure;
  }
  const std::string text = j.dump(2);
  std::cout << text << '\n';
  if (opts.out_dir) {
    fs::create_directories(*opts.out_dir);
    std::ofstream(*opts.out_dir / "diagnose.json") << text << '\n';
  }
  return ExitCode::ok;
}

int main(int argc, char** argv) {
  CLI::App app{"Phase-field simulation of volume-preserving mean curvature flow"};
  app.require_subcommand(1);
  std::string config;
  std::string out;
  bool normalize = false;
  std::vector<double> eps;
  auto add_common = [&](CLI::App* sub, const std::string& what) {
    sub->add_option("config", config, what)->required();
    sub->add_option("--out", out, "Output directory (overrides out_dir)");
    sub->add_flag("--normalize-manifest", normalize, "Write fixed manifest timestamps");
  };
  auto* sim = app.add_subcommand("simulate", "Run one simulation");
  add_common(sim, "Config file");
  auto* sweep = app.add_subcommand("sweep", "Run one simulation per epsilon");
  add_common(sweep, "Base config file");
  sweep->add_option("--eps", eps, "Interface widths")->delimiter(',');
  auto* oracle = app.add_subcommand("oracle", "Sharp-interface reference trajectories");
  add_common(oracle, "Oracle config file");
  auto* diag = app.add_subcommand("diagnose", "Diagnostics of a phi snapshot");
  add_common(diag, "Snapshot file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ExitCode::config_error;
  }
  CommandOptions opts;
  if (!out.empty()) opts.out_dir = out;
  opts.normalize_manifest = normalize;
  if (sim->parsed()) return cmd_simulate(config, opts);
  if (sweep->parsed()) return cmd_sweep(config, eps, opts);
  if (oracle->parsed()) return cmd_oracle(config, opts);
  return cmd_diagnose(config, opts);
}

}  // namespace pks::cli
