#include "chemoflock/linearized.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "chemoflock/quadrature.hpp"

namespace chemoflock {

namespace {

// Location of the kernel's maximum: root of z^2 + 2 z - 1/(4D) = 0.
double kernel_peak(const ModelParams& p) { return -1.0 + std::sqrt(1.0 + 0.25 / p.diffusion); }

std::vector<double> kernel_breakpoints(const ModelParams& p) {
  const double zs = kernel_peak(p);
  std::vector<double> b;
  for (double f : {0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 1000.0}) b.push_back(f * zs);
  for (double z : {1.0, 3.0, 10.0, 20.0}) b.push_back(z);
  return b;
}

double kernel_prefactor(const ModelParams& p) {
  return static_cast<double>(p.n_particles) * p.gamma * p.xi / (8.0 * p.diffusion * p.diffusion);
}

// Smallest Z >= 1 with prefactor * e^{-Z} / Z^p <= bound.
double tail_cutoff(double prefactor, double bound, int power) {
  double z = 1.0;
  while (std::abs(prefactor) * std::exp(-z) / std::pow(z, power) > bound) z += 0.25;
  return z;
}

double n_cbar(double z, const ModelParams& p) {
  return static_cast<double>(p.n_particles) * cbar(z, p);
}

}  // namespace

double cbar(double z, const ModelParams& params) {
  if (!(z > 0.0)) return 0.0;
  const double d = params.diffusion;
  // Avoid 0/0 once the exponential has underflowed.
  if (0.25 / (z * d) > 700.0) return 0.0;
  return params.gamma * params.xi * std::exp(-0.25 / (z * d) - z) / (8.0 * z * z * d * d);
}

double g_of_t(double t, const ModelParams& params) {
  params.validate();
  if (!(t > 0.0)) return 0.0;
  const auto breaks = kernel_breakpoints(params);
  return integrate([&](double z) { return n_cbar(z, params); }, 0.0, t, {1e-10, 20000}, 0.0,
                   breaks)
      .value;
}

GInfinity g_infinity(const ModelParams& params) {
  params.validate();
  GInfinity r;
  const double pre = kernel_prefactor(params);
  r.cutoff = tail_cutoff(pre, 1e-12, 2);
  r.tail_bound = std::abs(pre) * std::exp(-r.cutoff) / (r.cutoff * r.cutoff);
  const auto breaks = kernel_breakpoints(params);
  r.value = integrate([&](double z) { return n_cbar(z, params); }, 0.0, r.cutoff, {1e-12, 20000},
                      0.0, breaks)
                .value;
  return r;
}

double g_infinity_double_exponential(const ModelParams& params) {
  params.validate();
  auto f = [&](double z) { return n_cbar(z, params); };
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  return ts.integrate(f, 0.0, 1.0) + es.integrate(f, 1.0, std::numeric_limits<double>::infinity());
}

double kernel_first_moment(const ModelParams& params) {
  params.validate();
  const double pre = kernel_prefactor(params);
  const double cutoff = tail_cutoff(pre, 1e-14, 1);
  const auto breaks = kernel_breakpoints(params);
  return integrate([&](double z) { return z * n_cbar(z, params); }, 0.0, cutoff, {1e-12, 20000},
                   0.0, breaks)
      .value;
}

GFunction::GFunction(const ModelParams& params, int nodes) : params_(params) {
  params.validate();
  if (nodes < 16) throw InvalidParameter("GFunction: at least 16 nodes required");
  const GInfinity gi = g_infinity(params);
  // Below t_min the kernel is under e^{-50} of its peak, so g is 0 there.
  const double t_min = 0.02 * kernel_peak(params);
  const double ratio = std::pow(gi.cutoff / t_min, 1.0 / (nodes - 1));
  t_.push_back(0.0);
  g_.push_back(0.0);
  dg_.push_back(0.0);
  double acc = 0.0;
  double prev = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double t = i + 1 == nodes ? gi.cutoff : t_min * std::pow(ratio, i);
    acc += integrate([&](double z) { return n_cbar(z, params); }, prev, t, {1e-12, 2000},
                     1e-16 * std::abs(gi.value))
               .value;
    t_.push_back(t);
    g_.push_back(acc);
    dg_.push_back(n_cbar(t, params));
    prev = t;
  }
  g_inf_ = acc;
}

double GFunction::operator()(double t) const {
  if (!(t > 0.0)) return 0.0;
  if (t >= t_.back()) return g_inf_;
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - t_.begin()) - 1;
  const double h = t_[k + 1] - t_[k];
  const double s = (t - t_[k]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * g_[k] + (s3 - 2 * s2 + s) * h * dg_[k] +
         (-2 * s3 + 3 * s2) * g_[k + 1] + (s3 - s2) * h * dg_[k + 1];
}

double GFunction::derivative(double t) const { return n_cbar(t, params_); }

LyapunovConstants lyapunov_constants(double t_bar, const ModelParams& params) {
  params.validate();
  if (!(t_bar > 0.0)) throw InvalidParameter("lyapunov_constants: t_bar must be positive");
  if (!(params.beta > 0.0)) throw InvalidParameter("lyapunov_constants: beta must be positive");
  if (!(params.gamma * params.xi > 0.0))
    throw InvalidParameter("lyapunov_constants: gamma * xi must be positive");

  LyapunovConstants c;
  c.t_bar = t_bar;
  c.g_lo = g_of_t(t_bar, params);
  if (!(c.g_lo > 0.0)) throw InvalidParameter("lyapunov_constants: g(t_bar) underflows to 0");
  const GInfinity gi = g_infinity(params);
  c.g_hi = std::max(gi.value, c.g_lo);
  c.psi_lo = std::exp(-c.g_hi / c.g_lo);
  c.psi_hi = std::exp(-1.0);

  // sup_{t >= t_bar} e^{-g/g_lo} N C(t) / g_lo: log-spaced scan, then golden
  // section around the best sample.
  const GFunction g(params);
  auto rate = [&](double t) { return std::exp(-g(t) / c.g_lo) * g.derivative(t) / c.g_lo; };
  const double t_hi = std::max(gi.cutoff, 2.0 * t_bar);
  const int samples = 4000;
  const double ratio = std::pow(t_hi / t_bar, 1.0 / (samples - 1));
  int best = 0;
  double best_val = rate(t_bar);
  for (int i = 1; i < samples; ++i) {
    const double v = rate(t_bar * std::pow(ratio, i));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double lo = t_bar * std::pow(ratio, std::max(best - 1, 0));
  double hi = t_bar * std::pow(ratio, std::min(best + 1, samples - 1));
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100 && hi - lo > 1e-14 * hi; ++it) {
    const double a = hi - phi * (hi - lo);
    const double b = lo + phi * (hi - lo);
    if (rate(a) >= rate(b))
      hi = b;
    else
      lo = a;
  }
  c.psi_dot_hi = std::max(best_val, rate(0.5 * (lo + hi)));

  const double b = params.beta;
  const double mix = c.psi_dot_hi + b * c.psi_hi;
  c.k = std::min({c.psi_lo / c.psi_hi, c.g_lo * c.psi_lo / c.psi_hi,
                  2.0 * b * c.g_lo * c.psi_lo * c.psi_lo /
                      (2.0 * c.g_lo * c.psi_lo * c.psi_hi + mix * mix)});
  c.k1 = std::max((1.0 + 0.5 * c.k) * c.psi_hi, (c.g_hi + 0.5 * c.k) * c.psi_hi);
  c.k2 = std::min(0.5 * c.psi_lo, 0.5 * c.g_lo * c.psi_lo);
  c.k3 = std::min(b * c.psi_lo, 0.5 * c.k * c.g_lo * c.psi_lo);
  if (!(c.k2 <= c.k1)) throw std::logic_error("lyapunov_constants: k2 > k1");
  return c;
}

LyapunovFunction::LyapunovFunction(const ModelParams& params, double t_bar)
    : g_(params), c_(lyapunov_constants(t_bar, params)) {}

double LyapunovFunction::operator()(double t, double v, double x) const {
  if (t < c_.t_bar) throw std::domain_error("lyapunov_value: t < t_bar");
  const double gt = g_(t);
  return (v * v + c_.k * x * v + gt * x * x) * std::exp(-gt / c_.g_lo);
}

double lyapunov_value(double t, double v, double x, const ModelParams& params, double t_bar) {
  if (t < t_bar) throw std::domain_error("lyapunov_value: t < t_bar");
  return LyapunovFunction(params, t_bar)(t, v, x);
}

std::vector<PlanarSample> integrate_planar(double v0, double x0, const ModelParams& params,
                                           double t_end, double dt, double t_bar) {
  if (!(dt > 0.0)) throw InvalidParameter("integrate_planar: dt must be positive");
  if (!(t_end >= 0.0)) throw InvalidParameter("integrate_planar: t_end must be nonnegative");
  const LyapunovFunction lyap(params, t_bar);
  const GFunction& g = lyap.g();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto u_at = [&](double t, double v, double x) { return t >= t_bar ? lyap(t, v, x) : nan; };

  const std::size_t steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  std::vector<PlanarSample> out;
  out.reserve(steps + 1);
  double v = v0, x = x0;
  out.push_back({0.0, v, x, u_at(0.0, v, x)});
  const double beta = params.beta;
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = n * dt;
    const double h = std::min(dt, t_end - t);
    const double gm = g(t + 0.5 * h);
    const double k1v = -beta * v - g(t) * x, k1x = v;
    const double k2v = -beta * (v + 0.5 * h * k1v) - gm * (x + 0.5 * h * k1x), k2x = v + 0.5 * h * k1v;
    const double k3v = -beta * (v + 0.5 * h * k2v) - gm * (x + 0.5 * h * k2x), k3x = v + 0.5 * h * k2v;
    const double k4v = -beta * (v + h * k3v) - g(t + h) * (x + h * k3x), k4x = v + h * k3v;
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
    if (!std::isfinite(v) || !std::isfinite(x))
      throw std::runtime_error("integrate_planar: non-finite state");
    const double tn = n + 1 == steps ? t_end : (n + 1) * dt;
    out.push_back({tn, v, x, u_at(tn, v, x)});
  }
  return out;
}

std::vector<CmSample> integrate_cm(double v0, const ModelParams& params, double t_end, double dt) {
  params.validate();
  if (!(dt > 0.0)) throw InvalidParameter("integrate_cm: dt must be positive");
  if (!(t_end >= 0.0)) throw InvalidParameter("integrate_cm: t_end must be nonnegative");
  const std::size_t steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double h = dt;

  // Hat-function weights of the kernel on panel [j h, (j+1) h]:
  //   a[j] = int K (1 - s),  b[j+1] = int K s,  s = (z - j h) / h.
  const double g_inf = g_infinity(params).value;
  const double window_t = tail_cutoff(kernel_prefactor(params), 1e-16 * std::max(g_inf, 1e-300), 2);
  const std::size_t window =
      std::min<std::size_t>(steps, static_cast<std::size_t>(std::ceil(window_t / h)));
  std::vector<double> a(window + 1, 0.0), b(window + 1, 0.0);
  const auto breaks = kernel_breakpoints(params);
  const QuadratureSpec spec{1e-12, 4000};
  for (std::size_t j = 0; j < window; ++j) {
    const double z0 = j * h;
    const double z1 = (j + 1) * h;
    a[j] = integrate([&](double z) { return n_cbar(z, params) * (1.0 - (z - z0) / h); }, z0, z1,
                     spec, 1e-18 * g_inf, breaks)
               .value;
    b[j + 1] = integrate([&](double z) { return n_cbar(z, params) * (z - z0) / h; }, z0, z1, spec,
                         1e-18 * g_inf, breaks)
                   .value;
  }

  std::vector<CmSample> out;
  out.reserve(steps + 1);
  std::vector<double> hist;  // I(t_m) = int_0^{t_m} V
  hist.reserve(steps + 1);
  double v = v0, integral = 0.0, j_n = 0.0;
  hist.push_back(0.0);
  out.push_back({0.0, v});
  for (std::size_t n = 0; n < steps; ++n) {
    const std::size_t m = n + 1;  // new level
    // J(t_m) = sum_{j=1}^{m} w_j (I_m - I_{m-j}), with w_j = a_j + b_j for
    // j < m and w_m = b_m. Split I_m - I_{m-j} = (I_m - I_n) + (I_n - I_{m-j}).
    double wsum = 0.0, known = 0.0;
    const std::size_t jmax = std::min(m, window);
    for (std::size_t j = 1; j <= jmax; ++j) {
      const double w = j < m ? a[j] + b[j] : b[j];
      wsum += w;
      known += w * (integral - hist[m - j]);
    }
    const double v_next =
        (v - 0.5 * h * j_n - 0.5 * h * (0.5 * h * wsum * v + known)) / (1.0 + 0.25 * wsum * h * h);
    const double di = 0.5 * h * (v + v_next);
    j_n = wsum * di + known;
    integral += di;
    v = v_next;
    if (!std::isfinite(v)) throw std::runtime_error("integrate_cm: non-finite state");
    hist.push_back(integral);
    out.push_back({m * h, v});
  }
  return out;
}

}  // namespace chemoflock
