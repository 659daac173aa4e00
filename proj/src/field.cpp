#include "chemoflock/field.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <iomanip>
#include <istream>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>

namespace chemoflock {

namespace {

int mod(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

ScalarField ScalarField::zeros(const DomainSpec& domain, double time) {
  return ScalarField{domain, std::vector<double>(domain.cells(), 0.0), time};
}

double ScalarField::sum() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

SourceField rasterize_sources(const ParticleState& state, const DomainSpec& domain) {
  SourceField src{domain, std::vector<int>(domain.cells(), 0)};
  const double dx = domain.dx();
  const double dy = domain.dy();
  for (std::size_t p = 0; p < state.size(); ++p) {
    if (state.roles[p] != Role::Leader) continue;
    const Vec2 c = domain.wrap(state.positions[p]);
    const int i_lo = static_cast<int>(std::ceil((c.x() - 1.0) / dx));
    const int i_hi = static_cast<int>(std::floor((c.x() + 1.0) / dx));
    const int j_lo = static_cast<int>(std::ceil((c.y() - 1.0) / dy));
    const int j_hi = static_cast<int>(std::floor((c.y() + 1.0) / dy));
    for (int j = j_lo; j <= j_hi; ++j) {
      const double ry = j * dy - c.y();
      for (int i = i_lo; i <= i_hi; ++i) {
        const double rx = i * dx - c.x();
        if (rx * rx + ry * ry <= 1.0)
          ++src.counts[static_cast<std::size_t>(mod(j, domain.ny)) * domain.nx + mod(i, domain.nx)];
      }
    }
  }
  return src;
}

void apply_laplacian(const DomainSpec& domain, const std::vector<double>& in,
                     std::vector<double>& out) {
  const int nx = domain.nx;
  const int ny = domain.ny;
  const double cx = 1.0 / (domain.dx() * domain.dx());
  const double cy = 1.0 / (domain.dy() * domain.dy());
  out.resize(in.size());
  for (int j = 0; j < ny; ++j) {
    const double* row = &in[static_cast<std::size_t>(j) * nx];
    const double* up = &in[static_cast<std::size_t>(mod(j + 1, ny)) * nx];
    const double* down = &in[static_cast<std::size_t>(mod(j - 1, ny)) * nx];
    double* o = &out[static_cast<std::size_t>(j) * nx];
    for (int i = 0; i < nx; ++i) {
      const int ip = i + 1 == nx ? 0 : i + 1;
      const int im = i == 0 ? nx - 1 : i - 1;
      o[i] = cx * (row[ip] - 2.0 * row[i] + row[im]) + cy * (up[i] - 2.0 * row[i] + down[i]);
    }
  }
}

struct CrankNicolsonSolver::FourierPlan {
  std::unique_ptr<double, FftwFree> real;
  std::unique_ptr<fftw_complex, FftwFree> spectrum;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  FourierPlan(int nx, int ny) {
    const std::size_t n_real = static_cast<std::size_t>(nx) * ny;
    const std::size_t n_spec = static_cast<std::size_t>(ny) * (nx / 2 + 1);
    real.reset(static_cast<double*>(fftw_malloc(sizeof(double) * n_real)));
    spectrum.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_spec)));
    if (!real || !spectrum) throw std::bad_alloc();
    // FFTW_ESTIMATE picks the same algorithm on every run, so results are
    // reproducible bit for bit.
    std::lock_guard<std::mutex> lock(planner_mutex());
    forward = fftw_plan_dft_r2c_2d(ny, nx, real.get(), spectrum.get(), FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_2d(ny, nx, spectrum.get(), real.get(), FFTW_ESTIMATE);
  }

  ~FourierPlan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

CrankNicolsonSolver::CrankNicolsonSolver(const DomainSpec& domain, ImplicitSolver solver,
                                         double cg_tolerance, int cg_max_iterations)
    : domain_(domain),
      solver_(solver),
      cg_tolerance_(cg_tolerance),
      cg_max_iterations_(cg_max_iterations) {
  domain_.validate();
  const int nx = domain_.nx;
  const int ny = domain_.ny;
  const int nk = nx / 2 + 1;
  const double cx = 4.0 / (domain_.dx() * domain_.dx());
  const double cy = 4.0 / (domain_.dy() * domain_.dy());
  laplacian_symbol_.resize(static_cast<std::size_t>(ny) * nk);
  for (int ky = 0; ky < ny; ++ky) {
    const double sy = std::sin(std::numbers::pi * ky / ny);
    for (int kx = 0; kx < nk; ++kx) {
      const double sx = std::sin(std::numbers::pi * kx / nx);
      laplacian_symbol_[static_cast<std::size_t>(ky) * nk + kx] = -cx * sx * sx - cy * sy * sy;
    }
  }
  if (solver_ == ImplicitSolver::Fourier) plan_ = std::make_unique<FourierPlan>(nx, ny);
}

CrankNicolsonSolver::~CrankNicolsonSolver() = default;
CrankNicolsonSolver::CrankNicolsonSolver(CrankNicolsonSolver&&) noexcept = default;
CrankNicolsonSolver& CrankNicolsonSolver::operator=(CrankNicolsonSolver&&) noexcept = default;

void CrankNicolsonSolver::solve_fourier(std::vector<double>& rhs, double a) {
  const std::size_t n = rhs.size();
  double* buf = plan_->real.get();
  std::copy(rhs.begin(), rhs.end(), buf);
  fftw_execute(plan_->forward);
  fftw_complex* spec = plan_->spectrum.get();
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < laplacian_symbol_.size(); ++k) {
    const double m = scale / (1.0 - a * laplacian_symbol_[k]);
    spec[k][0] *= m;
    spec[k][1] *= m;
  }
  fftw_execute(plan_->backward);
  std::copy(buf, buf + n, rhs.begin());
}

void CrankNicolsonSolver::solve_cg(std::vector<double>& rhs, double a) {
  const std::size_t n = rhs.size();
  auto apply = [&](const std::vector<double>& v, std::vector<double>& out,
                   std::vector<double>& scratch) {
    apply_laplacian(domain_, v, scratch);
    out.resize(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = v[k] - a * scratch[k];
  };
  auto dot = [n](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += u[k] * v[k];
    return s;
  };

  const double b_norm = std::sqrt(dot(rhs, rhs));
  if (b_norm == 0.0) return;

  std::vector<double> x = rhs;
  std::vector<double> r(n), p(n), ap(n), scratch(n);
  apply(x, ap, scratch);
  for (std::size_t k = 0; k < n; ++k) r[k] = rhs[k] - ap[k];
  p = r;
  double rr = dot(r, r);
  const double target = cg_tolerance_ * b_norm;
  int it = 0;
  while (std::sqrt(rr) > target) {
    if (it++ >= cg_max_iterations_)
      throw FieldSolverError("conjugate gradient did not converge", std::sqrt(rr) / b_norm);
    apply(p, ap, scratch);
    const double alpha = rr / dot(p, ap);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    const double rr_new = dot(r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
  }
  rhs.swap(x);
}

ScalarField CrankNicolsonSolver::step(const ScalarField& field, const SourceField& src,
                                      const ModelParams& params, double dt) {
  if (!(dt > 0.0)) throw InvalidParameter("cn_step: dt must be positive");
  if (field.values.size() != domain_.cells() || src.counts.size() != domain_.cells())
    throw InvalidParameter("cn_step: field and source shape do not match the solver grid");

  const double a = 0.5 * dt * params.diffusion;
  const double decay = std::exp(-dt);
  const double source_weight = dt * params.xi * 0.5 * (1.0 + decay);

  std::vector<double> lap;
  apply_laplacian(domain_, field.values, lap);
  std::vector<double> rhs(field.values.size());
  for (std::size_t k = 0; k < rhs.size(); ++k)
    rhs[k] = decay * (field.values[k] + a * lap[k]) + source_weight * src.counts[k];

  if (solver_ == ImplicitSolver::Fourier)
    solve_fourier(rhs, a);
  else
    solve_cg(rhs, a);

  return ScalarField{domain_, std::move(rhs), field.time + dt};
}

void CrankNicolsonSolver::reset(const ScalarField& field) {
  if (field.values.size() != domain_.cells())
    throw InvalidParameter("cn reset: field shape does not match the solver grid");
  current_ = field;
  current_.domain = domain_;
  field_hat_.clear();
  source_counts_.clear();
  if (solver_ != ImplicitSolver::Fourier) return;
  double* buf = plan_->real.get();
  std::copy(field.values.begin(), field.values.end(), buf);
  fftw_execute(plan_->forward);
  const auto* spec = reinterpret_cast<const std::complex<double>*>(plan_->spectrum.get());
  field_hat_.assign(spec, spec + laplacian_symbol_.size());
}

const ScalarField& CrankNicolsonSolver::advance(const SourceField& src, const ModelParams& params,
                                                double dt) {
  if (current_.values.size() != domain_.cells()) reset(ScalarField::zeros(domain_));
  if (solver_ != ImplicitSolver::Fourier) {
    current_ = step(current_, src, params, dt);
    return current_;
  }
  if (!(dt > 0.0)) throw InvalidParameter("cn_step: dt must be positive");
  if (src.counts.size() != domain_.cells())
    throw InvalidParameter("cn_step: source shape does not match the solver grid");

  double* buf = plan_->real.get();
  auto* spec = reinterpret_cast<std::complex<double>*>(plan_->spectrum.get());
  const std::size_t n = domain_.cells();
  const std::size_t nk = laplacian_symbol_.size();
  if (src.counts != source_counts_) {
    source_counts_ = src.counts;
    for (std::size_t k = 0; k < n; ++k) buf[k] = src.counts[k];
    fftw_execute(plan_->forward);
    source_hat_.assign(spec, spec + nk);
  }

  if (dt != cached_dt_ || params.diffusion != cached_diffusion_ || params.xi != cached_xi_) {
    const double a = 0.5 * dt * params.diffusion;
    const double decay = std::exp(-dt);
    const double source_weight = dt * params.xi * 0.5 * (1.0 + decay);
    field_gain_.resize(nk);
    source_gain_.resize(nk);
    for (std::size_t k = 0; k < nk; ++k) {
      const double al = a * laplacian_symbol_[k];
      field_gain_[k] = decay * (1.0 + al) / (1.0 - al);
      source_gain_[k] = source_weight / (1.0 - al);
    }
    cached_dt_ = dt;
    cached_diffusion_ = params.diffusion;
    cached_xi_ = params.xi;
  }
  for (std::size_t k = 0; k < nk; ++k)
    field_hat_[k] = field_gain_[k] * field_hat_[k] + source_gain_[k] * source_hat_[k];
  // c2r overwrites its input, so transform a copy.
  std::copy(field_hat_.begin(), field_hat_.end(), spec);
  fftw_execute(plan_->backward);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) current_.values[k] = buf[k] * scale;
  current_.time += dt;
  return current_;
}

ScalarField cn_step(const ScalarField& field, const SourceField& src, const ModelParams& params,
                    double dt, ImplicitSolver solver) {
  CrankNicolsonSolver s(field.domain, solver);
  return s.step(field, src, params, dt);
}

GradientField gradient_field(const ScalarField& field, GradientStencil stencil) {
  const DomainSpec& d = field.domain;
  const int nx = d.nx;
  const int ny = d.ny;
  GradientField g{ScalarField::zeros(d, field.time), ScalarField::zeros(d, field.time)};
  const double sx = 1.0 / (2.0 * d.dx());
  const double sy = 1.0 / (2.0 * d.dy());
  const bool central = stencil == GradientStencil::Central;
  for (int j = 0; j < ny; ++j) {
    const int jp = mod(j + 1, ny);
    const int jm = central ? mod(j - 1, ny) : j;
    for (int i = 0; i < nx; ++i) {
      const int ip = mod(i + 1, nx);
      const int im = central ? mod(i - 1, nx) : i;
      g.ddx.at(i, j) = (field.at(ip, j) - field.at(im, j)) * sx;
      g.ddy.at(i, j) = (field.at(i, jp) - field.at(i, jm)) * sy;
    }
  }
  return g;
}

namespace {

// Bilinear or nearest-node interpolation of node values gx(i, j), gy(i, j).
template <class Gx, class Gy>
Vec2 interpolate(const DomainSpec& d, const Vec2& x, Interpolation interp, Gx gx, Gy gy) {
  const Vec2 p = d.wrap(x);
  const double sx = p.x() / d.dx();
  const double sy = p.y() / d.dy();
  if (interp == Interpolation::Nearest) {
    const int i = mod(static_cast<int>(std::lround(sx)), d.nx);
    const int j = mod(static_cast<int>(std::lround(sy)), d.ny);
    return {gx(i, j), gy(i, j)};
  }
  const double fx = std::floor(sx);
  const double fy = std::floor(sy);
  const double tx = sx - fx;
  const double ty = sy - fy;
  const int i0 = mod(static_cast<int>(fx), d.nx);
  const int j0 = mod(static_cast<int>(fy), d.ny);
  const int i1 = mod(i0 + 1, d.nx);
  const int j1 = mod(j0 + 1, d.ny);
  auto bilinear = [&](auto&& g) {
    return (1.0 - tx) * (1.0 - ty) * g(i0, j0) + tx * (1.0 - ty) * g(i1, j0) +
           (1.0 - tx) * ty * g(i0, j1) + tx * ty * g(i1, j1);
  };
  return {bilinear(gx), bilinear(gy)};
}

}  // namespace

Vec2 sample_gradient(const GradientField& grad, const Vec2& x, Interpolation interp) {
  return interpolate(
      grad.ddx.domain, x, interp, [&](int i, int j) { return grad.ddx.at(i, j); },
      [&](int i, int j) { return grad.ddy.at(i, j); });
}

Vec2 sample_gradient(const ScalarField& field, const Vec2& x, GradientStencil stencil,
                     Interpolation interp) {
  const DomainSpec& d = field.domain;
  const double sx = 1.0 / (2.0 * d.dx());
  const double sy = 1.0 / (2.0 * d.dy());
  const bool central = stencil == GradientStencil::Central;
  auto gx = [&](int i, int j) {
    return (field.at(mod(i + 1, d.nx), j) - field.at(central ? mod(i - 1, d.nx) : i, j)) * sx;
  };
  auto gy = [&](int i, int j) {
    return (field.at(i, mod(j + 1, d.ny)) - field.at(i, central ? mod(j - 1, d.ny) : j)) * sy;
  };
  return interpolate(d, x, interp, gx, gy);
}

double sample_field(const ScalarField& field, const Vec2& x) {
  auto f = [&](int i, int j) { return field.at(i, j); };
  return interpolate(field.domain, x, Interpolation::Bilinear, f, f).x();
}

void write_snapshot(std::ostream& os, const ScalarField& field) {
  const DomainSpec& d = field.domain;
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << d.nx << ' ' << d.ny << '\n' << d.dx() << ' ' << d.dy() << '\n' << field.time << '\n';
  for (int j = 0; j < d.ny; ++j) {
    for (int i = 0; i < d.nx; ++i) {
      if (i) os << ' ';
      os << field.at(i, j);
    }
    os << '\n';
  }
}

ScalarField read_snapshot(std::istream& is) {
  DomainSpec d;
  double dx = 0.0, dy = 0.0, time = 0.0;
  if (!(is >> d.nx >> d.ny >> dx >> dy >> time))
    throw std::runtime_error("snapshot: malformed header");
  d.lx = dx * d.nx;
  d.ly = dy * d.ny;
  d.validate();
  ScalarField f = ScalarField::zeros(d, time);
  for (double& v : f.values)
    if (!(is >> v)) throw std::runtime_error("snapshot: truncated value block");
  return f;
}

}  // namespace chemoflock
