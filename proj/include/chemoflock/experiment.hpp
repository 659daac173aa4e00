#pragma once

#include <cstdint>
#include <string>

#include "chemoflock/integrator.hpp"
#include "chemoflock/model.hpp"

namespace chemoflock {

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

struct OutputOptions {
  std::string directory = ".";
  int field_snapshot_every = 0;
  bool one_sided_gradient = false;
  bool nearest_interpolation = false;
  bool raw_distance = false;
  bool symplectic_positions = false;
};

struct ExperimentConfig {
  ModelParams params;
  DomainSpec domain;
  StepConfig step;
  Rect init_region;
  double v0_max = 0.0;
  std::size_t leader_count = 0;  // leaders occupy the first indices
  std::uint64_t seed = 1;
  OutputOptions outputs;

  void validate() const;
  SchemeOptions scheme() const;
  // Domain with the distance mode selected by the output toggles.
  DomainSpec effective_domain() const;
};

// Positions uniform in init_region, speeds uniform in [0, v0_max], headings
// uniform in [0, 2 pi). Draws come from std::mt19937_64 seeded with `seed`,
// mapped to doubles as (u >> 11) * 2^-53, in the order x, y, speed, heading
// for each particle in turn.
ParticleState init_particles(const ExperimentConfig& config);

// Numerical test configurations 1..9 on [0,50]^2 with dx = dy = 0.25.
ExperimentConfig preset(int test_id);

// Coarsens the grid and the main timestep by `factor` (factor 2 halves the
// resolution). The ramp keeps covering the same simulated time.
ExperimentConfig scaled(const ExperimentConfig& config, double factor);

// YAML config with sections model, domain, steps, init, output.
ExperimentConfig parse_config(const std::string& text);
std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

}  // namespace chemoflock
