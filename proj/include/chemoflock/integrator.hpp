#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "chemoflock/field.hpp"
#include "chemoflock/metrics.hpp"
#include "chemoflock/model.hpp"
#include "chemoflock/trajectory.hpp"

namespace chemoflock {

// Time stepping schedule: ramp_steps steps of dt_parabolic (dt ~ dx^2/D while
// the signal is still building up), then dt_main (dt ~ dx) until t_end.
struct StepConfig {
  double dt_parabolic = 3.125e-4;
  double dt_main = 0.05;
  int ramp_steps = 320;
  double t_end = 1.0;
  int snapshot_every = 1;  // metrics / trajectory cadence, in steps

  void validate() const;
};

enum class PositionUpdate {
  Explicit,    // X^{k+1} = X^k + dt V^k
  Symplectic,  // X^{k+1} = X^k + dt V^{k+1}
};

struct SchemeOptions {
  GradientStencil stencil = GradientStencil::Central;
  Interpolation interpolation = Interpolation::Bilinear;
  PositionUpdate position_update = PositionUpdate::Explicit;
  ImplicitSolver field_solver = ImplicitSolver::Fourier;
};

// Symmetric graph Laplacian of the alignment weights scaled by beta/N:
// L_ij = -(beta/N) w_ij for i != j, L_ii = (beta/N) sum_{j != i} w_ij.
Eigen::MatrixXd build_alignment_operator(const ParticleState& state, const ModelParams& params,
                                         const DomainSpec& domain);

// One IMEX step: alignment implicit with weights frozen at X^k, chemotaxis
// explicit from the sampled gradient,
//   (I + dt L) V^{k+1} = V^k + dt * gamma * grad f(X^k).
ParticleState imex_step(const ParticleState& state, const GradientField& grad,
                        const ModelParams& params, const DomainSpec& domain, double dt,
                        const SchemeOptions& scheme = {});

// Same step with the gradient already sampled at each particle.
ParticleState imex_step(const ParticleState& state, const std::vector<Vec2>& gradients,
                        const ModelParams& params, const DomainSpec& domain, double dt,
                        const SchemeOptions& scheme = {});

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

struct StepEvent {
  std::size_t step;  // index of the completed step (1-based)
  double t;
  double dt;
  const ParticleState& before;
  const ParticleState& after;
  const ScalarField& field;
};

struct RunOptions {
  SchemeOptions scheme;
  int field_snapshot_every = 0;  // 0 disables field snapshots
  bool record_trajectory = true;
  std::function<void(const StepEvent&)> on_step;
};

struct SimulationRecord {
  std::vector<MetricsSample> metrics;
  TrajectoryRecord trajectory;  // wrapped positions at the metrics cadence
  std::vector<ScalarField> snapshots;
  ParticleState final_state;
  ScalarField final_field;
  std::size_t steps = 0;
};

// Coupled loop from f = 0: each step rasterises sources at X^k, advances the
// field, then advances the particles with the gradient of the new field.
SimulationRecord run_simulation(const ModelParams& params, const DomainSpec& domain,
                                const StepConfig& step, const ParticleState& init,
                                const RunOptions& options = {});

}  // namespace chemoflock
