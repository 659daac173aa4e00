#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chemoflock/integrator.hpp"
#include "helpers.hpp"

using namespace chemoflock;
using testing_helpers::make_state;
using testing_helpers::random_state;

namespace {

ModelParams flock_params(std::size_t n) {
  ModelParams p;
  p.beta = 5.0;
  p.sigma = 0.5;
  p.gamma = 200.0;
  p.diffusion = 200.0;
  p.xi = 0.5;
  p.n_particles = n;
  return p;
}

Vec2 mean_velocity(const ParticleState& s) {
  Vec2 m = Vec2::Zero();
  for (const auto& v : s.velocities) m += v;
  return m / static_cast<double>(s.size());
}

StepConfig short_schedule(double t_end) {
  StepConfig c;
  c.dt_parabolic = 3.125e-4;
  c.ramp_steps = 40;
  c.dt_main = 0.05;
  c.t_end = t_end;
  c.snapshot_every = 2;
  return c;
}

}  // namespace

TEST_CASE("alignment operator examples") {
  DomainSpec d;
  ModelParams p = flock_params(1);
  auto one = make_state({{1, 1}}, {{1, 0}}, 0);
  auto l1 = build_alignment_operator(one, p, d);
  CHECK(l1.rows() == 1);
  CHECK(l1(0, 0) == 0.0);

  p = flock_params(2);
  p.beta = 1.0;
  auto two = make_state({{3, 3}, {3, 3}}, {{0, 0}, {0, 0}}, 0);
  auto l2 = build_alignment_operator(two, p, d);
  CHECK(l2(0, 0) == doctest::Approx(0.5));
  CHECK(l2(0, 1) == doctest::Approx(-0.5));
  CHECK(l2(1, 0) == doctest::Approx(-0.5));
  CHECK(l2(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("alignment operator is a symmetric graph Laplacian") {
  DomainSpec d;
  for (unsigned seed = 1; seed <= 5; ++seed) {
    auto p = flock_params(25);
    auto s = random_state(25, 3, d, seed);
    auto l = build_alignment_operator(s, p, d);
    CHECK((l - l.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(l.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-14);
    for (double dt : {1e-4, 0.05, 10.0}) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Identity(25, 25) + dt * l;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
      CHECK(es.eigenvalues().minCoeff() >= 1.0 - 1e-12);
    }
  }
}

TEST_CASE("imex step with equal velocities and no gradient is pure transport") {
  DomainSpec d;
  auto p = flock_params(3);
  auto s = make_state({{1, 1}, {10, 20}, {49.9, 0.05}}, {{2, -1}, {2, -1}, {2, -1}}, 1);
  std::vector<Vec2> g(3, Vec2::Zero());
  auto next = imex_step(s, g, p, d, 0.1, {});
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK((next.velocities[i] - Vec2(2, -1)).norm() <= 1e-14);
    CHECK(d.displacement(next.positions[i], s.positions[i] + Vec2(0.2, -0.1)).norm() <= 1e-13);
    CHECK(next.positions[i].x() >= 0.0);
    CHECK(next.positions[i].x() < d.lx);
    CHECK(next.positions[i].y() >= 0.0);
    CHECK(next.positions[i].y() < d.ly);
  }
  CHECK(next.roles == s.roles);
}

TEST_CASE("imex step conserves mean velocity without chemotaxis") {
  DomainSpec d;
  auto p = flock_params(15);
  auto s = random_state(15, 5, d, 12, 3.0);
  std::vector<Vec2> g(15, Vec2::Zero());
  for (double dt : {1e-3, 0.05, 1.0}) {
    auto next = imex_step(s, g, p, d, dt, {});
    CHECK((mean_velocity(next) - mean_velocity(s)).norm() <= 1e-12);
  }
}

TEST_CASE("single particle feels only the gradient") {
  DomainSpec d;
  auto p = flock_params(1);
  auto s = make_state({{5, 5}}, {{0.3, 0.1}}, 1);
  auto next = imex_step(s, {Vec2(0.01, -0.02)}, p, d, 0.05, {});
  CHECK(next.velocities[0].x() == doctest::Approx(0.3 + 0.05 * 200.0 * 0.01));
  CHECK(next.velocities[0].y() == doctest::Approx(0.1 - 0.05 * 200.0 * 0.02));
  CHECK(next.positions[0].x() == doctest::Approx(5.0 + 0.05 * 0.3));
}

TEST_CASE("position update variants") {
  DomainSpec d;
  auto p = flock_params(1);
  auto s = make_state({{5, 5}}, {{1.0, 0.0}}, 1);
  std::vector<Vec2> g{Vec2(0.01, 0.0)};
  SchemeOptions sym;
  sym.position_update = PositionUpdate::Symplectic;
  auto ex = imex_step(s, g, p, d, 0.1, {});
  auto sy = imex_step(s, g, p, d, 0.1, sym);
  CHECK(ex.positions[0].x() == doctest::Approx(5.1));
  CHECK(sy.positions[0].x() == doctest::Approx(5.0 + 0.1 * sy.velocities[0].x()));
}

TEST_CASE("imex step rejects bad input") {
  DomainSpec d;
  auto p = flock_params(2);
  auto s = random_state(2, 1, d, 1);
  CHECK_THROWS_AS(imex_step(s, std::vector<Vec2>(2, Vec2::Zero()), p, d, 0.0, {}),
                  InvalidParameter);
  CHECK_THROWS_AS(imex_step(s, std::vector<Vec2>(1, Vec2::Zero()), p, d, 0.1, {}),
                  InvalidParameter);
}

TEST_CASE("imex velocity update agrees with explicit Euler to second order in dt") {
  DomainSpec d;
  auto p = flock_params(8);
  auto s = random_state(8, 2, d, 31, 2.0);
  // Cluster the particles so the weights are not negligible.
  for (auto& x : s.positions) x = Vec2(25, 25) + 0.1 * (x - Vec2(25, 25));
  std::vector<Vec2> g;
  for (std::size_t i = 0; i < s.size(); ++i) g.emplace_back(std::sin(1.0 * i), std::cos(2.0 * i));
  std::vector<double> dts{0.04, 0.02, 0.01, 0.005, 0.0025};
  std::vector<double> errs;
  for (double dt : dts) {
    auto next = imex_step(s, g, p, d, dt, {});
    double err = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Vec2 euler = s.velocities[i] + dt * (alignment_force(i, s, p, d) + p.gamma * g[i]);
      err = std::max(err, (next.velocities[i] - euler).norm());
    }
    errs.push_back(err);
  }
  for (std::size_t k = 1; k < errs.size(); ++k) CHECK(std::log2(errs[k - 1] / errs[k]) >= 1.9);
}

TEST_CASE("single leader at rest stays at its position") {
  DomainSpec d;
  auto p = flock_params(1);
  auto s = make_state({{25.0, 25.0}}, {{0, 0}}, 1);
  StepConfig c = short_schedule(50.0);
  RunOptions o;
  o.record_trajectory = false;
  auto rec = run_simulation(p, d, c, s, o);
  CHECK((rec.final_state.positions[0] - Vec2(25, 25)).norm() <= 1e-8);
  CHECK(rec.final_state.velocities[0].norm() <= 1e-8);
}

TEST_CASE("rigid drift without coupling keeps the shape") {
  DomainSpec d;
  for (bool no_signal : {true, false}) {
    auto p = flock_params(6);
    if (no_signal) p.xi = 0.0;
    else p.gamma = 0.0;
    auto s = random_state(6, 6, d, 4);
    for (auto& x : s.positions) x = Vec2(20, 20) + 0.3 * (x - Vec2(25, 25));
    for (auto& v : s.velocities) v = Vec2(0.7, -0.4);
    auto rec = run_simulation(p, d, short_schedule(10.0), s, {});
    const double fl0 = rec.metrics.front().fl_x;
    for (const auto& m : rec.metrics) CHECK(std::abs(m.fl_x - fl0) <= 1e-10);
  }
}

TEST_CASE("momentum is conserved per step without chemotaxis") {
  DomainSpec d;
  auto p = flock_params(10);
  p.gamma = 0.0;
  auto s = random_state(10, 10, d, 6, 3.0);
  for (auto& x : s.positions) x = Vec2(25, 25) + 0.2 * (x - Vec2(25, 25));
  RunOptions o;
  double worst = 0.0;
  o.on_step = [&](const StepEvent& e) {
    worst = std::max(worst, (mean_velocity(e.after) - mean_velocity(e.before)).norm());
  };
  run_simulation(p, d, short_schedule(5.0), s, o);
  CHECK(worst <= 1e-12);
}

TEST_CASE("simulation is deterministic and records at the requested cadence") {
  DomainSpec d{25.0, 25.0, 100, 100};
  auto p = flock_params(5);
  auto s = random_state(5, 5, d, 9, 1.0);
  for (auto& x : s.positions) x = Vec2(12.5, 12.5) + 0.2 * (x - Vec2(12.5, 12.5));
  StepConfig c = short_schedule(2.0);
  RunOptions o;
  o.field_snapshot_every = 10;
  auto a = run_simulation(p, d, c, s, o);
  auto b = run_simulation(p, d, c, s, o);
  REQUIRE(a.metrics.size() == b.metrics.size());
  for (std::size_t k = 0; k < a.metrics.size(); ++k) {
    CHECK(a.metrics[k].fl_x == b.metrics[k].fl_x);
    CHECK(a.metrics[k].fl_v == b.metrics[k].fl_v);
    CHECK(a.metrics[k].v_cm_norm == b.metrics[k].v_cm_norm);
  }
  CHECK(a.final_field.values == b.final_field.values);

  const std::size_t steps = 40 + static_cast<std::size_t>(std::ceil((2.0 - 40 * 3.125e-4) / 0.05));
  CHECK(a.steps == steps);
  CHECK(a.metrics.size() == 1 + steps / 2 + (steps % 2 ? 1 : 0));
  CHECK(a.metrics.back().t == doctest::Approx(2.0));
  CHECK(a.trajectory.times.size() == a.metrics.size());
  CHECK(a.snapshots.size() == 1 + steps / 10 + (steps % 10 ? 1 : 0));
  CHECK(a.final_field.time == doctest::Approx(2.0));
}

TEST_CASE("permuting the particles permutes the trajectory") {
  DomainSpec d{25.0, 25.0, 100, 100};
  auto p = flock_params(5);
  auto s = random_state(5, 3, d, 19, 1.0);
  for (auto& x : s.positions) x = Vec2(12.5, 12.5) + 0.2 * (x - Vec2(12.5, 12.5));
  std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  ParticleState t = s;
  for (std::size_t k = 0; k < 5; ++k) {
    t.positions[k] = s.positions[perm[k]];
    t.velocities[k] = s.velocities[perm[k]];
    t.roles[k] = s.roles[perm[k]];
  }
  RunOptions o;
  o.record_trajectory = false;
  auto a = run_simulation(p, d, short_schedule(3.0), s, o);
  auto b = run_simulation(p, d, short_schedule(3.0), t, o);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(d.min_image(b.final_state.positions[k] - a.final_state.positions[perm[k]]).norm() <=
          1e-9);
    CHECK((b.final_state.velocities[k] - a.final_state.velocities[perm[k]]).norm() <= 1e-9);
  }
  CHECK(a.metrics.back().fl_x == doctest::Approx(b.metrics.back().fl_x).epsilon(1e-9));
}

TEST_CASE("non-finite dynamics abort with the step index") {
  DomainSpec d{25.0, 25.0, 100, 100};
  auto p = flock_params(1);
  p.xi = 1e308;
  auto s = make_state({{10.1, 10.2}}, {{0, 0}}, 1);
  try {
    run_simulation(p, d, short_schedule(1.0), s, {});
    FAIL("expected SimulationError");
  } catch (const SimulationError& e) {
    CHECK(e.step() >= 1);
  }
}
