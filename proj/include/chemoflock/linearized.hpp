#pragma once

#include <vector>

#include "chemoflock/model.hpp"

namespace chemoflock {

// Memory kernel of the linearised problem about a coincident group at rest,
//   C(z) = gamma xi e^{-1/(4 z D) - z} / (8 z^2 D^2),  z > 0,
// and 0 for z <= 0 (the limit at 0+).
double cbar(double z, const ModelParams& params);

// g(t) = N int_0^t C(z) dz, adaptive quadrature to relative tolerance 1e-10.
double g_of_t(double t, const ModelParams& params);

// g(infinity): quadrature up to a cutoff Z whose analytic tail bound
// N gamma xi / (8 D^2) e^{-Z} / Z^2 is below 1e-12.
struct GInfinity {
  double value = 0.0;
  double cutoff = 0.0;
  double tail_bound = 0.0;
};
GInfinity g_infinity(const ModelParams& params);

// Same limit by tanh-sinh on [0, 1] plus exp-sinh on [1, inf); an independent
// quadrature used as a cross-check.
double g_infinity_double_exponential(const ModelParams& params);

// N int_0^inf z C(z) dz, the friction coefficient felt by a group drifting
// slowly through its own signal.
double kernel_first_moment(const ModelParams& params);

// g(t) tabulated on a graded grid and evaluated by cubic Hermite
// interpolation with the exact derivative N C(t). Constant at g(infinity)
// past the cutoff. Read-only after construction.
class GFunction {
 public:
  explicit GFunction(const ModelParams& params, int nodes = 4000);

  double operator()(double t) const;
  double derivative(double t) const;  // N C(t)
  double limit() const { return g_inf_; }

 private:
  ModelParams params_;
  std::vector<double> t_;
  std::vector<double> g_;
  std::vector<double> dg_;
  double g_inf_ = 0.0;
};

struct LyapunovConstants {
  double t_bar = 0.0;
  double g_lo = 0.0;        // g(t_bar)
  double g_hi = 0.0;        // g(infinity)
  double psi_lo = 0.0;      // e^{-g_hi / g_lo}
  double psi_hi = 0.0;      // e^{-1}
  double psi_dot_hi = 0.0;  // sup_{t >= t_bar} e^{-g/g_lo} g' / g_lo
  double k = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
};

// Requires t_bar > 0, beta > 0 and gamma xi > 0; otherwise the constants
// degenerate (k or k3 would vanish) and InvalidParameter is thrown.
LyapunovConstants lyapunov_constants(double t_bar, const ModelParams& params);

// U(t, V, X) = (V^2 + k X V + g(t) X^2) psi(t),  psi = e^{-g(t)/g(t_bar)}.
class LyapunovFunction {
 public:
  LyapunovFunction(const ModelParams& params, double t_bar);

  double operator()(double t, double v, double x) const;
  const LyapunovConstants& constants() const { return c_; }
  const GFunction& g() const { return g_; }

 private:
  GFunction g_;
  LyapunovConstants c_;
};

// One-shot evaluation; builds the constants on every call. Throws
// std::domain_error for t < t_bar.
double lyapunov_value(double t, double v, double x, const ModelParams& params, double t_bar);

struct PlanarSample {
  double t;
  double v;
  double x;
  double u;  // Lyapunov function, NaN before t_bar
};

// Classical RK4 for V' = -beta V - g(t) X, X' = V from t = 0.
std::vector<PlanarSample> integrate_planar(double v0, double x0, const ModelParams& params,
                                           double t_end, double dt, double t_bar = 1.0);

struct CmSample {
  double t;
  double v;
};

// Centre-of-mass velocity component under
//   V'(t) = -N int_0^t C(t - tau) int_tau^t V(s) ds dtau.
// The kernel is integrated exactly against piecewise-linear history
// (product trapezoid), so dt only needs to resolve V, not the sharp kernel;
// the step is implicit trapezoidal. The history is truncated where the
// kernel tail drops below rounding, so a step costs O(min(n, window)).
std::vector<CmSample> integrate_cm(double v0, const ModelParams& params, double t_end, double dt);

}  // namespace chemoflock
