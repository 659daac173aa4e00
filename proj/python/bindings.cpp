#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <vector>

#include "chemoflock/experiment.hpp"
#include "chemoflock/greens.hpp"
#include "chemoflock/linearized.hpp"

namespace py = pybind11;
using namespace chemoflock;

namespace {

py::array_t<double> to_array(const std::vector<Vec2>& v) {
  py::array_t<double> out({static_cast<py::ssize_t>(v.size()), py::ssize_t{2}});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < v.size(); ++i) {
    a(i, 0) = v[i].x();
    a(i, 1) = v[i].y();
  }
  return out;
}

std::vector<Vec2> to_points(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) throw InvalidParameter("expected an (n, 2) array");
  auto r = a.unchecked<2>();
  std::vector<Vec2> out;
  for (py::ssize_t i = 0; i < a.shape(0); ++i) out.emplace_back(r(i, 0), r(i, 1));
  return out;
}

py::dict state_dict(const ParticleState& s) {
  py::dict d;
  d["positions"] = to_array(s.positions);
  d["velocities"] = to_array(s.velocities);
  std::vector<bool> leaders;
  for (Role r : s.roles) leaders.push_back(r == Role::Leader);
  d["leaders"] = py::array_t<bool>(py::cast(leaders));
  return d;
}

py::dict run(const ExperimentConfig& config) {
  config.validate();
  RunOptions o;
  o.scheme = config.scheme();
  o.record_trajectory = false;
  const ParticleState init = init_particles(config);
  SimulationRecord rec;
  {
    py::gil_scoped_release release;
    rec = run_simulation(config.params, config.effective_domain(), config.step, init, o);
  }
  const auto n = static_cast<py::ssize_t>(rec.metrics.size());
  py::array_t<double> t(n), flx(n), flv(n), vcm(n);
  auto pt = t.mutable_unchecked<1>();
  auto px = flx.mutable_unchecked<1>();
  auto pv = flv.mutable_unchecked<1>();
  auto pc = vcm.mutable_unchecked<1>();
  for (py::ssize_t k = 0; k < n; ++k) {
    const auto& s = rec.metrics[k];
    pt(k) = s.t;
    px(k) = s.fl_x;
    pv(k) = s.fl_v;
    pc(k) = s.v_cm_norm;
  }
  py::dict d;
  d["t"] = t;
  d["fl_x"] = flx;
  d["fl_v"] = flv;
  d["v_cm_norm"] = vcm;
  d["steps"] = rec.steps;
  d["final"] = state_dict(rec.final_state);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Leader-follower flocking with a chemotactic signal.";

  py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
  py::register_exception<QuadratureError>(m, "QuadratureError", PyExc_RuntimeError);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("beta", &ModelParams::beta)
      .def_readwrite("sigma", &ModelParams::sigma)
      .def_readwrite("gamma", &ModelParams::gamma)
      .def_readwrite("diffusion", &ModelParams::diffusion)
      .def_readwrite("xi", &ModelParams::xi)
      .def_readwrite("n_particles", &ModelParams::n_particles)
      .def("validate", &ModelParams::validate);

  py::class_<DomainSpec>(m, "DomainSpec")
      .def(py::init<>())
      .def_readwrite("lx", &DomainSpec::lx)
      .def_readwrite("ly", &DomainSpec::ly)
      .def_readwrite("nx", &DomainSpec::nx)
      .def_readwrite("ny", &DomainSpec::ny)
      .def_property_readonly("dx", &DomainSpec::dx)
      .def_property_readonly("dy", &DomainSpec::dy);

  py::class_<StepConfig>(m, "StepConfig")
      .def(py::init<>())
      .def_readwrite("dt_parabolic", &StepConfig::dt_parabolic)
      .def_readwrite("dt_main", &StepConfig::dt_main)
      .def_readwrite("ramp_steps", &StepConfig::ramp_steps)
      .def_readwrite("t_end", &StepConfig::t_end)
      .def_readwrite("snapshot_every", &StepConfig::snapshot_every);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("params", &ExperimentConfig::params)
      .def_readwrite("domain", &ExperimentConfig::domain)
      .def_readwrite("step", &ExperimentConfig::step)
      .def_readwrite("v0_max", &ExperimentConfig::v0_max)
      .def_readwrite("leader_count", &ExperimentConfig::leader_count)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_property(
          "init_region",
          [](const ExperimentConfig& c) {
            const Rect& r = c.init_region;
            return py::make_tuple(r.x0, r.y0, r.x1, r.y1);
          },
          [](ExperimentConfig& c, std::tuple<double, double, double, double> r) {
            c.init_region = {std::get<0>(r), std::get<1>(r), std::get<2>(r), std::get<3>(r)};
          })
      .def("validate", &ExperimentConfig::validate);

  m.def("preset", &preset, py::arg("test_id"));
  m.def("scaled", &scaled, py::arg("config"), py::arg("factor"));
  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("serialize_config", &serialize_config, py::arg("config"));
  m.def("load_config", &load_config, py::arg("path"));
  m.def(
      "init_particles", [](const ExperimentConfig& c) { return state_dict(init_particles(c)); },
      py::arg("config"));
  m.def("run", &run, py::arg("config"));

  m.def(
      "oracle_f",
      [](const std::pair<double, double>& x, double t, const py::array_t<double>& leaders,
         const ModelParams& params, double tol_rel) {
        const auto pts = to_points(leaders);
        const TrajectoryRecord traj =
            TrajectoryRecord::stationary(pts, std::vector<Role>(pts.size(), Role::Leader), t);
        return oracle_f({x.first, x.second}, t, traj, params, {tol_rel, 2000});
      },
      py::arg("x"), py::arg("t"), py::arg("leaders"), py::arg("params"), py::arg("tol_rel") = 1e-8,
      "Free-space signal at x and time t from leaders resting at the given (n, 2) positions.");
  m.def(
      "oracle_grad_f",
      [](const std::pair<double, double>& x, double t, const py::array_t<double>& leaders,
         const ModelParams& params, double tol_rel) {
        const auto pts = to_points(leaders);
        const TrajectoryRecord traj =
            TrajectoryRecord::stationary(pts, std::vector<Role>(pts.size(), Role::Leader), t);
        const Vec2 g = oracle_grad_f({x.first, x.second}, t, traj, params, {tol_rel, 2000});
        return py::make_tuple(g.x(), g.y());
      },
      py::arg("x"), py::arg("t"), py::arg("leaders"), py::arg("params"), py::arg("tol_rel") = 1e-8);

  m.def("cbar", &cbar, py::arg("z"), py::arg("params"));
  m.def("g_of_t", &g_of_t, py::arg("t"), py::arg("params"));
  m.def(
      "g_infinity", [](const ModelParams& p) { return g_infinity(p).value; }, py::arg("params"));
  m.def("kernel_first_moment", &kernel_first_moment, py::arg("params"));
  m.def(
      "lyapunov_constants",
      [](double t_bar, const ModelParams& p) {
        const auto c = lyapunov_constants(t_bar, p);
        py::dict d;
        d["k"] = c.k;
        d["k1"] = c.k1;
        d["k2"] = c.k2;
        d["k3"] = c.k3;
        d["g_lo"] = c.g_lo;
        d["g_hi"] = c.g_hi;
        return d;
      },
      py::arg("t_bar"), py::arg("params"));
  m.def(
      "integrate_planar",
      [](double v0, double x0, const ModelParams& p, double t_end, double dt, double t_bar) {
        const auto s = integrate_planar(v0, x0, p, t_end, dt, t_bar);
        py::array_t<double> out({static_cast<py::ssize_t>(s.size()), py::ssize_t{4}});
        auto a = out.mutable_unchecked<2>();
        for (std::size_t k = 0; k < s.size(); ++k) {
          a(k, 0) = s[k].t;
          a(k, 1) = s[k].v;
          a(k, 2) = s[k].x;
          a(k, 3) = s[k].u;
        }
        return out;
      },
      py::arg("v0"), py::arg("x0"), py::arg("params"), py::arg("t_end"), py::arg("dt"),
      py::arg("t_bar") = 1.0, "Rows of (t, v, x, U).");
  m.def(
      "integrate_cm",
      [](double v0, const ModelParams& p, double t_end, double dt) {
        const auto s = integrate_cm(v0, p, t_end, dt);
        py::array_t<double> out({static_cast<py::ssize_t>(s.size()), py::ssize_t{2}});
        auto a = out.mutable_unchecked<2>();
        for (std::size_t k = 0; k < s.size(); ++k) {
          a(k, 0) = s[k].t;
          a(k, 1) = s[k].v;
        }
        return out;
      },
      py::arg("v0"), py::arg("params"), py::arg("t_end"), py::arg("dt"), "Rows of (t, v_cm).");
}
