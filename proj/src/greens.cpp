#include "chemoflock/greens.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace chemoflock {

namespace {

constexpr double kZCut = 8.0;          // e^{-64}: Gaussian tail beyond this is below rounding
constexpr double kMaxElapsed = 50.0;   // e^{-50} decay: older history is negligible
constexpr double kInnerAbsTol = 1e-15;

const double kInvSqrtPi = 1.0 / std::sqrt(std::numbers::pi);

// Integrates h(z, w) over z with u = b + sigma z restricted to the chord range
// [-1, 1], where w = sqrt(1 - u^2) is the disk's half-chord at height u. Kinks
// sit where w = |a|.
template <class H>
double chord_integral(double a, double b, double sigma, const QuadratureSpec& quad, H h) {
  const double z_lo = std::max((-1.0 - b) / sigma, -kZCut);
  const double z_hi = std::min((1.0 - b) / sigma, kZCut);
  if (!(z_lo < z_hi)) return 0.0;
  auto integrand = [&](double z) {
    const double u = b + sigma * z;
    const double w = std::sqrt(std::max(0.0, 1.0 - u * u));
    return h(z, w);
  };
  double kinks[2];
  std::size_t nk = 0;
  if (std::abs(a) < 1.0) {
    const double u0 = std::sqrt(1.0 - a * a);
    kinks[nk++] = (-u0 - b) / sigma;
    kinks[nk++] = (u0 - b) / sigma;
  }
  return integrate(integrand, z_lo, z_hi, quad, kInnerAbsTol, std::span<const double>(kinks, nk))
      .value;
}

// Gaussian mass inside the unit disk; a = c1 - x1, b = x2 - c2.
double disk_mass(double a, double b, double sigma, const QuadratureSpec& quad) {
  return chord_integral(a, b, sigma, quad, [&](double z, double w) {
    return kInvSqrtPi * std::exp(-z * z) * 0.5 *
           (std::erf((a + w) / sigma) - std::erf((a - w) / sigma));
  });
}

// sigma * d(disk_mass)/da.
double disk_mass_slope(double a, double b, double sigma, const QuadratureSpec& quad) {
  return chord_integral(a, b, sigma, quad, [&](double z, double w) {
    const double p = (a + w) / sigma;
    const double m = (a - w) / sigma;
    return kInvSqrtPi * std::exp(-z * z) * kInvSqrtPi * (std::exp(-p * p) - std::exp(-m * m));
  });
}

std::vector<std::size_t> leaders_of(const TrajectoryRecord& traj) {
  std::vector<std::size_t> l;
  for (std::size_t j = 0; j < traj.particles(); ++j)
    if (traj.roles[j] == Role::Leader) l.push_back(j);
  return l;
}

void check_inputs(double t, const TrajectoryRecord& traj, const ModelParams& params,
                  const QuadratureSpec& quad) {
  params.validate();
  quad.validate();
  traj.validate();
  if (!(t >= 0.0)) throw InvalidParameter("oracle: t must be nonnegative");
  if (t > traj.end_time() * (1.0 + 1e-12))
    throw InvalidParameter("oracle: t is past the end of the trajectory");
}

// Integrates e^{-s^2} 2 s * term(s, X(t - s^2)) over s in [0, sqrt(min(t, cutoff))],
// split at the trajectory samples where the interpolated path has kinks.
template <class Term>
double time_integral(double t, const TrajectoryRecord& traj, const QuadratureSpec& quad,
                     double abs_tol, Term term) {
  const double theta_max = std::min(t, kMaxElapsed);
  const double s_max = std::sqrt(theta_max);
  std::vector<double> breaks;
  for (double tk : traj.times)
    if (tk > t - theta_max && tk < t) breaks.push_back(std::sqrt(t - tk));
  return integrate(term, 0.0, s_max, quad, abs_tol, breaks).value;
}

QuadratureSpec inner_spec(const QuadratureSpec& quad) {
  QuadratureSpec q = quad;
  q.tol_rel = std::max(0.1 * quad.tol_rel, 1e-14);
  return q;
}

}  // namespace

double oracle_f(const Vec2& x, double t, const TrajectoryRecord& traj, const ModelParams& params,
                const QuadratureSpec& quad) {
  check_inputs(t, traj, params, quad);
  const std::vector<std::size_t> leaders = leaders_of(traj);
  if (t == 0.0 || leaders.empty() || params.xi == 0.0) return 0.0;
  const QuadratureSpec inner = inner_spec(quad);
  const double sqrt4d = std::sqrt(4.0 * params.diffusion);

  auto term = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double sigma = sqrt4d * s;
    const double tau = t - s * s;
    double mass = 0.0;
    for (std::size_t j : leaders) {
      const Vec2 c = traj.position_at(j, tau);
      mass += disk_mass(c.x() - x.x(), x.y() - c.y(), sigma, inner);
    }
    return 2.0 * s * std::exp(-s * s) * mass;
  };
  const double scale = static_cast<double>(leaders.size());
  return params.xi * time_integral(t, traj, quad, 1e-14 * scale, term);
}

Vec2 oracle_grad_f(const Vec2& x, double t, const TrajectoryRecord& traj,
                   const ModelParams& params, const QuadratureSpec& quad) {
  check_inputs(t, traj, params, quad);
  const std::vector<std::size_t> leaders = leaders_of(traj);
  if (t == 0.0 || leaders.empty() || params.xi == 0.0) return Vec2::Zero();
  const QuadratureSpec inner = inner_spec(quad);
  const double sqrt4d = std::sqrt(4.0 * params.diffusion);
  // 2 s / sigma, the Jacobian of s = sqrt(t - tau) against the 1/sigma of the slope.
  const double jac = 2.0 / sqrt4d;
  const double scale = static_cast<double>(leaders.size()) / std::sqrt(params.diffusion);

  Vec2 g;
  for (int axis = 0; axis < 2; ++axis) {
    const int other = 1 - axis;
    auto term = [&](double s) {
      if (s <= 0.0) return 0.0;
      const double sigma = sqrt4d * s;
      const double tau = t - s * s;
      double slope = 0.0;
      for (std::size_t j : leaders) {
        const Vec2 c = traj.position_at(j, tau);
        // Roles of the coordinates swap for the second component.
        slope += disk_mass_slope(c[axis] - x[axis], x[other] - c[other], sigma, inner);
      }
      // a = c - x along the axis, so d/dx = -d/da.
      return -jac * std::exp(-s * s) * slope;
    };
    g[axis] = params.xi * time_integral(t, traj, quad, 1e-14 * scale, term);
  }
  return g;
}

}  // namespace chemoflock
