#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pks/cli.hpp"
#include "pks/io.hpp"
#include "pks/mcf_oracle.hpp"
#include "pks/potentials.hpp"
#include "pks/rho_solver.hpp"
#include "pks/stepper.hpp"

namespace py = pybind11;
using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

namespace {

pks::ScalarField field_from(const Array& a, double h) {
  pks::Grid g;
  if (a.ndim() == 2) {
    g = pks::Grid(static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0)), h);
  } else if (a.ndim() == 3) {
    g = pks::Grid(static_cast<std::size_t>(a.shape(2)), static_cast<std::size_t>(a.shape(1)),
                  static_cast<std::size_t>(a.shape(0)), h);
  } else {
    throw py::value_error("expected a 2D (ny, nx) or 3D (nz, ny, nx) array");
  }
  pks::ScalarField f(g);
  std::copy(a.data(), a.data() + a.size(), f.values.begin());
  return f;
}

Array array_from(const pks::ScalarField& f) {
  std::vector<py::ssize_t> shape;
  if (f.grid.dim() == 3) shape.push_back(static_cast<py::ssize_t>(f.grid.nz));
  shape.push_back(static_cast<py::ssize_t>(f.grid.ny));
  shape.push_back(static_cast<py::ssize_t>(f.grid.nx));
  Array out(shape);
  std::copy(f.values.begin(), f.values.end(), out.mutable_data());
  return out;
}

py::dict records_dict(const pks::StepRecord& initial, const std::vector<pks::StepRecord>& recs) {
  std::vector<const pks::StepRecord*> all{&initial};
  for (const auto& r : recs) all.push_back(&r);
  auto column = [&](double pks::StepRecord::*member) {
    Array a(static_cast<py::ssize_t>(all.size()));
    for (std::size_t k = 0; k < all.size(); ++k) a.mutable_data()[k] = all[k]->*member;
    return a;
  };
  py::dict d;
  d["t"] = column(&pks::StepRecord::t);
  d["ell"] = column(&pks::StepRecord::ell);
  d["lambda"] = column(&pks::StepRecord::lambda);
  d["energy_J"] = column(&pks::StepRecord::energy_J);
  d["energy_J_alt"] = column(&pks::StepRecord::energy_J_alt);
  d["dissipation_cum"] = column(&pks::StepRecord::dissipation_cum);
  d["mass_rho"] = column(&pks::StepRecord::mass_rho);
  d["forcing_l2_cum"] = column(&pks::StepRecord::forcing_l2_cum);
  d["area"] = column(&pks::StepRecord::area_over_half);
  d["perimeter"] = column(&pks::StepRecord::perimeter_ms);
  d["radius"] = column(&pks::StepRecord::radius_est);
  d["mismatch_l2_sq"] = column(&pks::StepRecord::mismatch_l2_sq);
  d["transition_fraction"] = column(&pks::StepRecord::transition_fraction);
  return d;
}

pks::cli::CommandOptions options(const std::optional<std::filesystem::path>& out, bool normalize) {
  pks::cli::CommandOptions o;
  o.out_dir = out;
  o.normalize_manifest = normalize;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = PKS_VERSION;

  py::class_<pks::PotentialParams>(m, "PotentialParams")
      .def(py::init<double>(), py::arg("A"))
      .def_property_readonly("A", &pks::PotentialParams::a)
      .def_property_readonly("delta", &pks::PotentialParams::delta)
      .def_property_readonly("gamma", &pks::PotentialParams::gamma)
      .def("__repr__", [](const pks::PotentialParams& p) {
        return "PotentialParams(A=" + pks::io::format_double(p.a()) + ")";
      });

  auto pointwise = [&m](const char* name, double (*fn)(double, const pks::PotentialParams&)) {
    m.def(
        name,
        [fn](py::array_t<double> x, double a) {
          const pks::PotentialParams p(a);
          return py::vectorize([&](double v) { return fn(v, p); })(x);
        },
        py::arg("x"), py::arg("A") = 0.25);
  };
  pointwise("g", pks::g_eval);
  pointwise("g_star", pks::g_star);
  pointwise("g_star_prime", pks::g_star_prime);
  pointwise("wbar", pks::wbar_eval);

  m.def(
      "rho_of_phi",
      [](const Array& phi, double h, double a, double target_mass) {
        const auto [rho, solve] = pks::rho_of_phi(field_from(phi, h), target_mass, pks::PotentialParams(a));
        return py::make_tuple(array_from(rho), solve.ell);
      },
      py::arg("phi"), py::arg("h"), py::arg("A") = 0.25, py::arg("target_mass") = 1.0,
      "Mass-constrained minimizer rho and its multiplier ell for a cell-centered phi.");

  m.def(
      "run",
      [](const std::string& config_text) {
        const pks::io::RunSettings rs =
            pks::io::settings_from(pks::io::KeyValueConfig::parse_string(config_text));
        struct Final : pks::RunObserver {
          pks::SimState state;
          void on_final(const pks::SimState& s) override { state = s; }
        } final_state;
        pks::RunResult r;
        {
          py::gil_scoped_release release;
          r = pks::Simulation(rs.sim).run(final_state);
        }
        py::dict out;
        out["records"] = records_dict(r.initial, r.records);
        const pks::SimState& last = final_state.state;
        out["phi"] = array_from(last.phi);
        out["rho"] = array_from(last.rho);
        out["ell"] = last.ell;
        py::dict inv;
        for (const pks::InvariantCheck* c : r.invariants.all()) inv[py::str(c->name)] = c->passed;
        out["invariants"] = inv;
        return out;
      },
      py::arg("config_text"), "Runs a simulation from config text held in memory.");

  m.def(
      "integrate_circles",
      [](std::vector<double> radii, double dt, double t_end, int d) {
        pks::mcf::CircleSystem sys;
        sys.d = d;
        sys.radii = std::move(radii);
        sys.centers.assign(sys.radii.size(), {0.0, 0.0, 0.0});
        const auto traj = pks::mcf::integrate_circles(sys, dt, t_end);
        Array rad({static_cast<py::ssize_t>(traj.times.size()), static_cast<py::ssize_t>(sys.radii.size())});
        for (std::size_t n = 0; n < traj.radii.size(); ++n) {
          std::copy(traj.radii[n].begin(), traj.radii[n].end(), rad.mutable_data() + n * sys.radii.size());
        }
        py::dict out;
        out["t"] = Array(static_cast<py::ssize_t>(traj.times.size()), traj.times.data());
        out["radii"] = rad;
        out["lambda"] = Array(static_cast<py::ssize_t>(traj.lambda.size()), traj.lambda.data());
        out["volume_drift"] = traj.volume_drift;
        out["stopped_early"] = traj.stopped_early;
        return out;
      },
      py::arg("radii"), py::arg("dt"), py::arg("t_end"), py::arg("d") = 2);

  m.def(
      "front_track",
      [](const std::vector<Array>& curves, double t_end, std::optional<double> dt) {
        pks::mcf::FrontSystem fronts;
        for (const Array& c : curves) {
          if (c.ndim() != 2 || c.shape(1) != 2) throw py::value_error("each curve must be an (N, 2) array");
          pks::mcf::FrontCurve fc;
          for (py::ssize_t i = 0; i < c.shape(0); ++i) fc.nodes.push_back({c.at(i, 0), c.at(i, 1)});
          fronts.curves.push_back(pks::mcf::resample(fc, fc.nodes.size()));
        }
        const double step = dt.value_or(pks::mcf::stable_front_dt(fronts));
        double t = 0.0;
        double lambda = 0.0;
        {
          py::gil_scoped_release release;
          while (t < t_end - 1e-12) {
            const double h = std::min(step, t_end - t);
            fronts = pks::mcf::front_track_step(fronts, h, &lambda);
            t += h;
          }
        }
        py::list out;
        for (const auto& fc : fronts.curves) {
          Array a({static_cast<py::ssize_t>(fc.nodes.size()), py::ssize_t{2}});
          for (std::size_t i = 0; i < fc.nodes.size(); ++i) {
            a.mutable_at(i, 0) = fc.nodes[i][0];
            a.mutable_at(i, 1) = fc.nodes[i][1];
          }
          out.append(a);
        }
        return py::make_tuple(out, lambda);
      },
      py::arg("curves"), py::arg("t_end"), py::arg("dt") = py::none(),
      "Evolves counterclockwise closed curves under V = -kappa + Lambda.");

  using Path = std::filesystem::path;
  using OptPath = std::optional<Path>;
  m.def(
      "simulate",
      [](const Path& config, const OptPath& out, bool normalize) {
        py::gil_scoped_release release;
        return pks::cli::cmd_simulate(config, options(out, normalize));
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("normalize_manifest") = false);
  m.def(
      "sweep",
      [](const Path& config, const std::vector<double>& eps, const OptPath& out, bool normalize) {
        py::gil_scoped_release release;
        return pks::cli::cmd_sweep(config, eps, options(out, normalize));
      },
      py::arg("config"), py::arg("eps"), py::arg("out") = py::none(), py::arg("normalize_manifest") = false);
  m.def(
      "oracle",
      [](const Path& config, const OptPath& out) {
        py::gil_scoped_release release;
        return pks::cli::cmd_oracle(config, options(out, false));
      },
      py::arg("config"), py::arg("out") = py::none());
  m.def(
      "diagnose",
      [](const Path& snapshot, const OptPath& out) { return pks::cli::cmd_diagnose(snapshot, options(out, false)); },
      py::arg("snapshot"), py::arg("out") = py::none());
  m.def(
      "main",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "pks-sharp");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        return pks::cli::main(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"), "Runs the command line interface with the given arguments.");
}
