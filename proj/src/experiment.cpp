#include "chemoflock/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace chemoflock {

void ExperimentConfig::validate() const {
  params.validate();
  domain.validate();
  step.validate();
  if (!(init_region.x1 > init_region.x0) || !(init_region.y1 > init_region.y0))
    throw InvalidParameter("init_region is degenerate");
  if (init_region.x0 < 0.0 || init_region.y0 < 0.0 || init_region.x1 > domain.lx ||
      init_region.y1 > domain.ly)
    throw InvalidParameter("init_region must lie inside the domain");
  if (!(v0_max >= 0.0)) throw InvalidParameter("v0_max must be nonnegative");
  if (leader_count > params.n_particles)
    throw InvalidParameter("leader_count exceeds n_particles");
  if (outputs.field_snapshot_every < 0)
    throw InvalidParameter("field_snapshot_every must be nonnegative");
}

SchemeOptions ExperimentConfig::scheme() const {
  SchemeOptions s;
  s.stencil = outputs.one_sided_gradient ? GradientStencil::OneSided : GradientStencil::Central;
  s.interpolation =
      outputs.nearest_interpolation ? Interpolation::Nearest : Interpolation::Bilinear;
  s.position_update =
      outputs.symplectic_positions ? PositionUpdate::Symplectic : PositionUpdate::Explicit;
  return s;
}

DomainSpec ExperimentConfig::effective_domain() const {
  DomainSpec d = domain;
  d.distance = outputs.raw_distance ? DistanceMode::Euclidean : DistanceMode::MinimumImage;
  return d;
}

ParticleState init_particles(const ExperimentConfig& config) {
  config.validate();
  std::mt19937_64 gen(config.seed);
  auto uniform01 = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };

  const std::size_t n = config.params.n_particles;
  const Rect& r = config.init_region;
  ParticleState s;
  s.positions.reserve(n);
  s.velocities.reserve(n);
  s.roles.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = r.x0 + (r.x1 - r.x0) * uniform01();
    const double y = r.y0 + (r.y1 - r.y0) * uniform01();
    const double speed = config.v0_max * uniform01();
    const double heading = 2.0 * std::numbers::pi * uniform01();
    s.positions.emplace_back(x, y);
    s.velocities.emplace_back(speed * std::cos(heading), speed * std::sin(heading));
    s.roles.push_back(i < config.leader_count ? Role::Leader : Role::Follower);
  }
  return s;
}

namespace {

constexpr double kRampTime = 0.1;
// The friction a particle feels from its own signal acts on lags of order
// 1/(4 D); with strong chemotaxis the main step has to resolve them.
constexpr double kMainStep = 1e-3;
constexpr double kWeakChemotaxisStep = 1e-2;
constexpr double kMetricsInterval = 0.1;

void set_schedule(ExperimentConfig& c, double dt_main) {
  const double dx = std::min(c.domain.dx(), c.domain.dy());
  c.step.dt_parabolic = dx * dx / (4.0 * c.params.diffusion);
  c.step.ramp_steps = static_cast<int>(std::ceil(kRampTime / c.step.dt_parabolic));
  c.step.dt_main = dt_main;
  c.step.snapshot_every = std::max(1, static_cast<int>(std::lround(kMetricsInterval / dt_main)));
}

ExperimentConfig test1_base() {
  ExperimentConfig c;
  c.params.sigma = 0.5;
  c.params.beta = 5.0;
  c.params.gamma = 2e2;
  c.params.diffusion = 2e2;
  c.params.xi = 0.5;
  c.params.n_particles = 10;
  c.domain = DomainSpec{50.0, 50.0, 200, 200, DistanceMode::MinimumImage};
  // The published initial squares are only shown in figures; this is an
  // approximation centred in the domain.
  c.init_region = Rect{20.0, 20.0, 30.0, 30.0};
  c.v0_max = 3.0;
  c.leader_count = c.params.n_particles;
  c.step.t_end = 500.0;
  set_schedule(c, kMainStep);
  return c;
}

}  // namespace

ExperimentConfig preset(int test_id) {
  ExperimentConfig c = test1_base();
  switch (test_id) {
    case 1:
      break;
    case 2:
      c.params.beta = 10.0;
      c.params.gamma = 10.0;
      c.step.t_end = 3500.0;
      c.step.dt_main = kWeakChemotaxisStep;
      break;
    case 3:
      c.params.beta = 15.0;
      c.params.gamma = 10.0;
      c.step.t_end = 3500.0;
      c.step.dt_main = kWeakChemotaxisStep;
      break;
    case 4:
      c.params.n_particles = 20;
      c.leader_count = 20;
      break;
    case 5:
      c.params.sigma = 0.8;
      c.params.gamma = 0.0;
      c.step.t_end = 15.0;
      break;
    case 6:
      c.params.sigma = 0.8;
      c.params.gamma = 1e2;
      c.step.t_end = 500.0;
      break;
    case 7:
      c.params.gamma = 1.5e2;
      c.params.xi = 3.0;
      c.v0_max = 0.3;
      c.leader_count = 1;
      break;
    case 8:
      c.params.sigma = 0.6;
      c.params.beta = 2.0;
      c.params.gamma = 1e2;
      c.params.xi = 3.0;
      c.v0_max = 0.0;
      c.leader_count = 1;
      break;
    case 9:
      c.params.beta = 0.0;
      c.params.gamma = 1e2;
      c.params.xi = 1.5;
      c.v0_max = 0.8;
      c.step.t_end = 4000.0;
      break;
    default:
      throw InvalidParameter("preset: test id must be in 1..9");
  }
  set_schedule(c, c.step.dt_main);
  return c;
}

ExperimentConfig scaled(const ExperimentConfig& config, double factor) {
  if (!(factor > 0.0)) throw InvalidParameter("scale factor must be positive");
  ExperimentConfig c = config;
  c.domain.nx = static_cast<int>(std::lround(config.domain.nx / factor));
  c.domain.ny = static_cast<int>(std::lround(config.domain.ny / factor));
  c.domain.validate();
  const double ramp_time = config.step.ramp_steps * config.step.dt_parabolic;
  const double dx = std::min(c.domain.dx(), c.domain.dy());
  c.step.dt_parabolic = dx * dx / (4.0 * c.params.diffusion);
  c.step.ramp_steps = static_cast<int>(std::ceil(ramp_time / c.step.dt_parabolic));
  c.step.dt_main = config.step.dt_main * factor;
  const double interval = config.step.snapshot_every * config.step.dt_main;
  c.step.snapshot_every = std::max(1, static_cast<int>(std::lround(interval / c.step.dt_main)));
  return c;
}

namespace {

template <typename T>
void read_opt(const YAML::Node& node, const char* key, T& out) {
  if (node && node[key]) out = node[key].as<T>();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw InvalidParameter(std::string("config: ") + e.what());
  }
  if (!root.IsMap()) throw InvalidParameter("config: top level must be a mapping");

  ExperimentConfig c;
  try {
    const auto model = root["model"];
    read_opt(model, "beta", c.params.beta);
    read_opt(model, "sigma", c.params.sigma);
    read_opt(model, "gamma", c.params.gamma);
    read_opt(model, "diffusion", c.params.diffusion);
    read_opt(model, "xi", c.params.xi);
    read_opt(model, "n_particles", c.params.n_particles);

    const auto domain = root["domain"];
    read_opt(domain, "lx", c.domain.lx);
    read_opt(domain, "ly", c.domain.ly);
    read_opt(domain, "nx", c.domain.nx);
    read_opt(domain, "ny", c.domain.ny);

    const auto steps = root["steps"];
    read_opt(steps, "dt_parabolic", c.step.dt_parabolic);
    read_opt(steps, "dt_main", c.step.dt_main);
    read_opt(steps, "ramp_steps", c.step.ramp_steps);
    read_opt(steps, "t_end", c.step.t_end);
    read_opt(steps, "snapshot_every", c.step.snapshot_every);

    const auto init = root["init"];
    if (init && init["region"]) {
      const auto r = init["region"].as<std::vector<double>>();
      if (r.size() != 4) throw InvalidParameter("config: init.region needs [x0, y0, x1, y1]");
      c.init_region = Rect{r[0], r[1], r[2], r[3]};
    }
    read_opt(init, "v0_max", c.v0_max);
    read_opt(init, "leader_count", c.leader_count);
    read_opt(init, "seed", c.seed);

    const auto out = root["output"];
    read_opt(out, "directory", c.outputs.directory);
    read_opt(out, "field_snapshot_every", c.outputs.field_snapshot_every);
    read_opt(out, "one_sided_gradient", c.outputs.one_sided_gradient);
    read_opt(out, "nearest_interpolation", c.outputs.nearest_interpolation);
    read_opt(out, "raw_distance", c.outputs.raw_distance);
    read_opt(out, "symplectic_positions", c.outputs.symplectic_positions);
  } catch (const YAML::Exception& e) {
    throw InvalidParameter(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string serialize_config(const ExperimentConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "beta" << YAML::Value << c.params.beta;
  e << YAML::Key << "sigma" << YAML::Value << c.params.sigma;
  e << YAML::Key << "gamma" << YAML::Value << c.params.gamma;
  e << YAML::Key << "diffusion" << YAML::Value << c.params.diffusion;
  e << YAML::Key << "xi" << YAML::Value << c.params.xi;
  e << YAML::Key << "n_particles" << YAML::Value << c.params.n_particles;
  e << YAML::EndMap;
  e << YAML::Key << "domain" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "lx" << YAML::Value << c.domain.lx;
  e << YAML::Key << "ly" << YAML::Value << c.domain.ly;
  e << YAML::Key << "nx" << YAML::Value << c.domain.nx;
  e << YAML::Key << "ny" << YAML::Value << c.domain.ny;
  e << YAML::EndMap;
  e << YAML::Key << "steps" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dt_parabolic" << YAML::Value << c.step.dt_parabolic;
  e << YAML::Key << "dt_main" << YAML::Value << c.step.dt_main;
  e << YAML::Key << "ramp_steps" << YAML::Value << c.step.ramp_steps;
  e << YAML::Key << "t_end" << YAML::Value << c.step.t_end;
  e << YAML::Key << "snapshot_every" << YAML::Value << c.step.snapshot_every;
  e << YAML::EndMap;
  e << YAML::Key << "init" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "region" << YAML::Value << YAML::Flow << YAML::BeginSeq << c.init_region.x0
    << c.init_region.y0 << c.init_region.x1 << c.init_region.y1 << YAML::EndSeq;
  e << YAML::Key << "v0_max" << YAML::Value << c.v0_max;
  e << YAML::Key << "leader_count" << YAML::Value << c.leader_count;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::EndMap;
  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "directory" << YAML::Value << c.outputs.directory;
  e << YAML::Key << "field_snapshot_every" << YAML::Value << c.outputs.field_snapshot_every;
  e << YAML::Key << "one_sided_gradient" << YAML::Value << c.outputs.one_sided_gradient;
  e << YAML::Key << "nearest_interpolation" << YAML::Value << c.outputs.nearest_interpolation;
  e << YAML::Key << "raw_distance" << YAML::Value << c.outputs.raw_distance;
  e << YAML::Key << "symplectic_positions" << YAML::Value << c.outputs.symplectic_positions;
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace chemoflock
