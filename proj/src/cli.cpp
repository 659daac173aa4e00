#include "chemoflock/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <unistd.h>

#include "chemoflock/experiment.hpp"
#include "chemoflock/greens.hpp"
#include "chemoflock/linearized.hpp"
#include "chemoflock/metrics.hpp"
#include "chemoflock/trajectory.hpp"

namespace chemoflock {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
  const fs::path tmp = path.string() + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    writer(os);
    os.flush();
    if (!os) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + ": " + ec.message());
  }
}

namespace {

void write_plot_script(std::ostream& os) {
  os << "# gnuplot script; run from this directory: gnuplot -p plot.gp\n"
     << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set multiplot layout 2,2\n"
     << "set logscale y\n"
     << "set format y '%.0e'\n"
     << "set xlabel 't'\n"
     << "set title 'position fluctuation'\n"
     << "plot 'metrics.csv' using 1:2 with lines title 'Fl_X'\n"
     << "set title 'velocity fluctuation'\n"
     << "plot 'metrics.csv' using 1:3 with lines title 'Fl_V'\n"
     << "unset logscale y\n"
     << "set format y '%g'\n"
     << "set title 'centre-of-mass speed'\n"
     << "plot 'metrics.csv' using 1:4 with lines title '|V_CM|'\n"
     << "set title 'final particles'\n"
     << "set xlabel 'x'\n"
     << "set ylabel 'y'\n"
     << "set size ratio -1\n"
     << "plot 'particles.csv' using 1:2 with points pt 7 title 'particles', \\\n"
     << "     'particles.csv' using 1:2:3:4 with vectors title 'velocity', \\\n"
     << "     'metrics.csv' using 5:6 with lines lw 0.5 title 'X_CM path'\n"
     << "unset multiplot\n";
}

void write_particles(std::ostream& os, const ParticleState& s) {
  os << std::setprecision(17) << "x,y,vx,vy,leader\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    os << s.positions[i].x() << ',' << s.positions[i].y() << ',' << s.velocities[i].x() << ','
       << s.velocities[i].y() << ',' << (s.roles[i] == Role::Leader ? 1 : 0) << '\n';
}

int cmd_run(int preset_id, const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out_dir, std::optional<int> snapshot_every, double scale) {
  ExperimentConfig c = config_path.empty() ? preset(preset_id) : load_config(config_path);
  if (seed) c.seed = *seed;
  if (scale != 1.0) c = scaled(c, scale);
  if (snapshot_every) c.outputs.field_snapshot_every = *snapshot_every;
  c.outputs.directory = out_dir;
  c.validate();

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const ParticleState init = init_particles(c);
  RunOptions opts;
  opts.scheme = c.scheme();
  opts.field_snapshot_every = c.outputs.field_snapshot_every;
  const SimulationRecord rec = run_simulation(c.params, c.effective_domain(), c.step, init, opts);

  write_file_atomic(dir / "config.yaml", [&](std::ostream& os) { os << serialize_config(c); });
  write_file_atomic(dir / "metrics.csv",
                    [&](std::ostream& os) { write_metrics_csv(os, rec.metrics); });
  write_file_atomic(dir / "trajectory.csv", [&](std::ostream& os) {
    write_trajectory(os, TrajectoryFile{c.params, c.domain, rec.trajectory});
  });
  write_file_atomic(dir / "particles.csv",
                    [&](std::ostream& os) { write_particles(os, rec.final_state); });
  if (!rec.snapshots.empty()) {
    fs::create_directories(dir / "fields");
    for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
      std::ostringstream name;
      name << "field_" << std::setw(6) << std::setfill('0') << k << ".txt";
      write_file_atomic(dir / "fields" / name.str(),
                        [&](std::ostream& os) { write_snapshot(os, rec.snapshots[k]); });
    }
  }
  write_file_atomic(dir / "plot.gp", write_plot_script);

  const auto cross = crossing_time(rec.metrics, Metric::MaxFluctuation, 1e-10);
  std::cout << "steps " << rec.steps << "\n";
  std::cout << "fluctuation_crossing_1e-10 " << (cross ? std::to_string(*cross) : "none") << "\n";
  std::cout << "final_v_cm_norm " << rec.metrics.back().v_cm_norm << "\n";
  return 0;
}

struct Probe {
  Vec2 x;
  double t;
};

std::vector<Probe> read_probes(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open probe file " + path);
  std::vector<Probe> probes;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double x, y, t;
    if (!(ss >> x >> y >> t)) continue;  // header line
    probes.push_back({Vec2(x, y), t});
  }
  if (probes.empty()) throw std::runtime_error("probe file has no x,y,t rows");
  return probes;
}

int cmd_oracle_compare(const std::string& traj_path, const std::string& probe_path,
                       const std::string& out_path, double dt, double tol) {
  std::ifstream is(traj_path);
  if (!is) throw std::runtime_error("cannot open trajectory file " + traj_path);
  const TrajectoryFile file = read_trajectory(is);
  const TrajectoryRecord path = unwrap(file.record, file.domain);
  std::vector<Probe> probes = read_probes(probe_path);
  std::sort(probes.begin(), probes.end(), [](const Probe& a, const Probe& b) { return a.t < b.t; });

  // Replay the field solver along the recorded path.
  CrankNicolsonSolver solver(file.domain);
  solver.reset(ScalarField::zeros(file.domain));
  ParticleState state;
  state.roles = path.roles;
  state.velocities.assign(path.particles(), Vec2::Zero());
  double t = 0.0;
  std::vector<double> f_solver(probes.size());
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const double target = probes[p].t;
    if (target > path.end_time() * (1 + 1e-12))
      throw std::runtime_error("probe time past the end of the trajectory");
    while (t < target - 1e-12) {
      const double h = std::min(dt, target - t);
      state.positions.clear();
      for (std::size_t j = 0; j < path.particles(); ++j) state.positions.push_back(path.position_at(j, t));
      solver.advance(rasterize_sources(state, file.domain), file.params, h);
      t += h;
    }
    f_solver[p] = sample_field(solver.current(), probes[p].x);
  }

  QuadratureSpec quad;
  quad.tol_rel = tol;
  std::size_t anchor = 0;
  while (anchor < path.particles() && path.roles[anchor] != Role::Leader) ++anchor;
  write_file_atomic(out_path, [&](std::ostream& os) {
    os << std::setprecision(17) << "x,y,t,f_solver,f_oracle,rel_err\n";
    for (std::size_t p = 0; p < probes.size(); ++p) {
      Vec2 x = probes[p].x;
      // Free-space oracle: use the periodic image of x nearest the first leader.
      if (anchor < path.particles()) {
        const Vec2 c = path.position_at(anchor, probes[p].t);
        x = c + file.domain.min_image(x - c);
      }
      const double fo = oracle_f(x, probes[p].t, path, file.params, quad);
      const double rel = std::abs(f_solver[p] - fo) / std::max(fo, 1e-6);
      os << probes[p].x.x() << ',' << probes[p].x.y() << ',' << probes[p].t << ',' << f_solver[p]
         << ',' << fo << ',' << rel << '\n';
    }
  });
  return 0;
}

int cmd_lyapunov(int preset_id, double t_bar, const std::string& out_path, double v0, double x0,
                 double t_end, double dt) {
  const ModelParams params = preset(preset_id).params;
  const auto series = integrate_planar(v0, x0, params, t_end, dt, t_bar);
  const LyapunovConstants c = lyapunov_constants(t_bar, params);
  std::cout << std::setprecision(10) << "t_bar " << c.t_bar << "\ng_lo " << c.g_lo << "\ng_hi "
            << c.g_hi << "\npsi_lo " << c.psi_lo << "\npsi_hi " << c.psi_hi << "\npsi_dot_hi "
            << c.psi_dot_hi << "\nk " << c.k << "\nk1 " << c.k1 << "\nk2 " << c.k2 << "\nk3 "
            << c.k3 << "\n";

  double norm_bar = std::hypot(v0, x0);
  for (const auto& s : series)
    if (s.t <= t_bar) norm_bar = std::hypot(s.v, s.x);
  write_file_atomic(out_path, [&](std::ostream& os) {
    os << std::setprecision(17) << "t,v,x,u,norm,bound\n";
    for (const auto& s : series) {
      os << s.t << ',' << s.v << ',' << s.x << ',';
      if (s.t >= t_bar) {
        const double bound =
            std::sqrt(c.k1 / c.k2) * norm_bar * std::exp(-c.k3 * (s.t - t_bar) / (2 * c.k1));
        os << s.u << ',' << std::hypot(s.v, s.x) << ',' << bound << '\n';
      } else {
        os << ",," << std::hypot(s.v, s.x) << ",\n";
      }
    }
  });
  return 0;
}

int cmd_cm_decay(int preset_id, double v0, const std::string& out_path, double t_end, double dt) {
  const ModelParams params = preset(preset_id).params;
  if (!(t_end > 0.0)) t_end = std::log(1e3) / kernel_first_moment(params) + 5.0;
  const auto series = integrate_cm(v0, params, t_end, dt);
  write_file_atomic(out_path, [&](std::ostream& os) {
    os << std::setprecision(17) << "t,v_cm\n";
    for (const auto& s : series) os << s.t << ',' << s.v << '\n';
  });
  std::cout << "t_end " << series.back().t << "\nfinal " << series.back().v << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Particle flocking with alignment and chemotaxis"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "simulate a preset or a config file");
  int run_preset = 0;
  std::string run_config, run_out = "out";
  std::uint64_t run_seed = 0;
  int run_snap = 0;
  double run_scale = 1.0;
  auto* preset_opt = run->add_option("--preset", run_preset, "test preset 1..9")->check(CLI::Range(1, 9));
  auto* config_opt = run->add_option("--config", run_config, "YAML config file")->check(CLI::ExistingFile);
  preset_opt->excludes(config_opt);
  auto* seed_opt = run->add_option("--seed", run_seed, "RNG seed");
  run->add_option("--out", run_out, "output directory")->capture_default_str();
  auto* snap_opt = run->add_option("--snapshot-every", run_snap, "field snapshot cadence in steps");
  run->add_option("--scale", run_scale, "coarsen grid and main timestep by this factor")
      ->check(CLI::PositiveNumber);

  auto* oc = app.add_subcommand("oracle-compare", "solver vs free-space quadrature oracle");
  std::string oc_traj, oc_probes, oc_out;
  double oc_dt = 0.01, oc_tol = 1e-8;
  oc->add_option("--trajectory", oc_traj)->required()->check(CLI::ExistingFile);
  oc->add_option("--probes", oc_probes, "CSV rows x,y,t")->required()->check(CLI::ExistingFile);
  oc->add_option("--out", oc_out)->required();
  oc->add_option("--dt", oc_dt, "replay timestep")->capture_default_str()->check(CLI::PositiveNumber);
  oc->add_option("--tol", oc_tol, "oracle relative tolerance")->capture_default_str();

  auto* ly = app.add_subcommand("lyapunov", "Lyapunov constants and a certified trajectory");
  int ly_preset = 1;
  double ly_tbar = 1.0, ly_v0 = 1.0, ly_x0 = 1.0, ly_tend = 20.0, ly_dt = 1e-3;
  std::string ly_out;
  ly->add_option("--preset", ly_preset)->required()->check(CLI::Range(1, 9));
  ly->add_option("--tbar", ly_tbar)->required()->check(CLI::PositiveNumber);
  ly->add_option("--out", ly_out)->required();
  ly->add_option("--v0", ly_v0)->capture_default_str();
  ly->add_option("--x0", ly_x0)->capture_default_str();
  ly->add_option("--t-end", ly_tend)->capture_default_str();
  ly->add_option("--dt", ly_dt)->capture_default_str()->check(CLI::PositiveNumber);

  auto* cm = app.add_subcommand("cm-decay", "linearised centre-of-mass velocity");
  int cm_preset = 1;
  double cm_v0 = 1.0, cm_tend = 0.0, cm_dt = 0.05;
  std::string cm_out;
  cm->add_option("--preset", cm_preset)->required()->check(CLI::Range(1, 9));
  cm->add_option("--v0", cm_v0)->required();
  cm->add_option("--out", cm_out)->required();
  cm->add_option("--t-end", cm_tend, "default: time for a 1e3 reduction at the friction rate");
  cm->add_option("--dt", cm_dt)->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) {
      if (!*preset_opt && !*config_opt) throw CLI::RequiredError("--preset or --config");
      return cmd_run(run_preset, run_config,
                     *seed_opt ? std::optional<std::uint64_t>(run_seed) : std::nullopt, run_out,
                     *snap_opt ? std::optional<int>(run_snap) : std::nullopt, run_scale);
    }
    if (*oc) return cmd_oracle_compare(oc_traj, oc_probes, oc_out, oc_dt, oc_tol);
    if (*ly) return cmd_lyapunov(ly_preset, ly_tbar, ly_out, ly_v0, ly_x0, ly_tend, ly_dt);
    if (*cm) return cmd_cm_decay(cm_preset, cm_v0, cm_out, cm_tend, cm_dt);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace chemoflock
