#pragma once

#include "chemoflock/model.hpp"
#include "chemoflock/quadrature.hpp"
#include "chemoflock/trajectory.hpp"

namespace chemoflock {

// Free-space signal f(x, t) from f(., 0) = 0, written as the heat-kernel
// convolution of the leader disks' history:
//
//   f(x, t) = xi sum_j int_0^t e^{-(t-tau)} P_j(x, t - tau) dtau,
//
// where P_j is the mass of the Gaussian with variance 2 D (t - tau) per axis,
// centred at x, that falls in the unit disk around X_j(tau). One of the two
// disk coordinates is integrated in closed form (error functions), the other
// by adaptive quadrature. The time integral uses s = sqrt(t - tau).
//
// The trajectory must be continuous (see unwrap); positions are linearly
// interpolated between samples. Requires t <= traj.end_time().
double oracle_f(const Vec2& x, double t, const TrajectoryRecord& traj, const ModelParams& params,
                const QuadratureSpec& quad = {});

// Spatial gradient of oracle_f, from the derivative of the error-function
// difference (a difference of Gaussians at the chord ends).
Vec2 oracle_grad_f(const Vec2& x, double t, const TrajectoryRecord& traj,
                   const ModelParams& params, const QuadratureSpec& quad = {});

}  // namespace chemoflock
