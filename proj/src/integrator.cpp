#include "chemoflock/integrator.hpp"

#include <Eigen/Cholesky>

#include <cassert>
#include <cmath>
#include <string>

namespace chemoflock {

void StepConfig::validate() const {
  if (!(dt_parabolic > 0.0) || !(dt_main > 0.0)) throw InvalidParameter("timesteps must be positive");
  if (ramp_steps < 0) throw InvalidParameter("ramp_steps must be nonnegative");
  if (!(t_end > 0.0)) throw InvalidParameter("t_end must be positive");
  if (snapshot_every < 1) throw InvalidParameter("snapshot_every must be at least 1");
}

Eigen::MatrixXd build_alignment_operator(const ParticleState& state, const ModelParams& params,
                                         const DomainSpec& domain) {
  const std::size_t n = state.size();
  const Eigen::Index ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(ni, ni);
  const double scale = params.beta / static_cast<double>(n);
  for (Eigen::Index i = 0; i < ni; ++i) {
    for (Eigen::Index j = i + 1; j < ni; ++j) {
      const double w = scale * alignment_weight(state.positions[i], state.positions[j],
                                                params.sigma, domain);
      l(i, j) = -w;
      l(j, i) = -w;
    }
  }
  for (Eigen::Index i = 0; i < ni; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < ni; ++j)
      if (j != i) s -= l(i, j);
    l(i, i) = s;
  }
  return l;
}

ParticleState imex_step(const ParticleState& state, const GradientField& grad,
                        const ModelParams& params, const DomainSpec& domain, double dt,
                        const SchemeOptions& scheme) {
  std::vector<Vec2> g(state.size(), Vec2::Zero());
  if (params.gamma != 0.0)
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = sample_gradient(grad, state.positions[i], scheme.interpolation);
  return imex_step(state, g, params, domain, dt, scheme);
}

ParticleState imex_step(const ParticleState& state, const std::vector<Vec2>& gradients,
                        const ModelParams& params, const DomainSpec& domain, double dt,
                        const SchemeOptions& scheme) {
  if (!(dt > 0.0)) throw InvalidParameter("imex_step: dt must be positive");
  if (gradients.size() != state.size())
    throw InvalidParameter("imex_step: one gradient per particle required");
  const std::size_t n = state.size();
  const Eigen::Index ni = static_cast<Eigen::Index>(n);

  Eigen::MatrixXd rhs(ni, 2);
  for (Eigen::Index i = 0; i < ni; ++i)
    rhs.row(i) = (state.velocities[i] + dt * params.gamma * gradients[i]).transpose();

  Eigen::MatrixXd system = build_alignment_operator(state, params, domain) * dt;
  system.diagonal().array() += 1.0;
  const Eigen::LLT<Eigen::MatrixXd> llt(system);
  // I + dt L is symmetric positive definite because L is a weighted graph
  // Laplacian; a failed factorisation means corrupted input.
  assert(llt.info() == Eigen::Success);
  const Eigen::MatrixXd v_next = llt.solve(rhs);

  ParticleState next = state;
  for (Eigen::Index i = 0; i < ni; ++i) {
    next.velocities[i] = v_next.row(i).transpose();
    const Vec2& v_move =
        scheme.position_update == PositionUpdate::Explicit ? state.velocities[i] : next.velocities[i];
    next.positions[i] = domain.wrap(state.positions[i] + dt * v_move);
  }
  return next;
}

namespace {

bool state_finite(const ParticleState& s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!s.positions[i].allFinite() || !s.velocities[i].allFinite()) return false;
  return true;
}

}  // namespace

SimulationRecord run_simulation(const ModelParams& params, const DomainSpec& domain,
                                const StepConfig& step, const ParticleState& init,
                                const RunOptions& options) {
  params.validate();
  domain.validate();
  step.validate();
  init.validate();
  if (init.size() == 0) throw InvalidParameter("run_simulation: no particles");

  SimulationRecord rec;
  CrankNicolsonSolver solver(domain, options.scheme.field_solver);
  ParticleState state = init;
  for (auto& p : state.positions) p = domain.wrap(p);
  solver.reset(ScalarField::zeros(domain));
  const ScalarField& field = solver.current();
  std::vector<Vec2> grads(state.size(), Vec2::Zero());
  double t = 0.0;

  auto record = [&](double time) {
    rec.metrics.push_back(compute_sample(time, state, domain));
    if (options.record_trajectory) {
      rec.trajectory.times.push_back(time);
      rec.trajectory.positions.push_back(state.positions);
    }
  };
  rec.trajectory.roles = state.roles;
  record(0.0);
  if (options.field_snapshot_every > 0) rec.snapshots.push_back(field);

  const double t_tol = 1e-12 * step.t_end;
  std::size_t k = 0;
  while (t < step.t_end - t_tol) {
    double dt = static_cast<int>(k) < step.ramp_steps ? step.dt_parabolic : step.dt_main;
    if (t + dt > step.t_end - t_tol) dt = step.t_end - t;

    solver.advance(rasterize_sources(state, domain), params, dt);
    if (params.gamma != 0.0)
      for (std::size_t i = 0; i < state.size(); ++i)
        grads[i] = sample_gradient(field, state.positions[i], options.scheme.stencil,
                                   options.scheme.interpolation);
    ParticleState next = imex_step(state, grads, params, domain, dt, options.scheme);
    // Non-finite field values propagate into the gradients, so one check covers both.
    if (!state_finite(next))
      throw SimulationError("non-finite state at step " + std::to_string(k + 1), k + 1);

    ++k;
    t += dt;
    if (options.on_step) options.on_step(StepEvent{k, t, dt, state, next, field});
    state = std::move(next);

    const bool last = t >= step.t_end - t_tol;
    if (k % static_cast<std::size_t>(step.snapshot_every) == 0 || last) record(t);
    if (options.field_snapshot_every > 0 &&
        (k % static_cast<std::size_t>(options.field_snapshot_every) == 0 || last))
      rec.snapshots.push_back(field);
  }

  rec.steps = k;
  rec.final_state = std::move(state);
  rec.final_field = field;
  rec.final_field.time = t;
  return rec;
}

}  // namespace chemoflock
