#pragma once

#include <complex>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <vector>

#include "chemoflock/model.hpp"

namespace chemoflock {

// Chemoattractant concentration sampled at the grid nodes of a periodic
// domain. values[j * nx + i] holds f(x_i, y_j).
struct ScalarField {
  DomainSpec domain;
  std::vector<double> values;
  double time = 0.0;

  static ScalarField zeros(const DomainSpec& domain, double time = 0.0);

  double& at(int i, int j) { return values[static_cast<std::size_t>(j) * domain.nx + i]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * domain.nx + i]; }
  double sum() const;
  double max_abs() const;
};

// Number of leader disks covering each grid node.
struct SourceField {
  DomainSpec domain;
  std::vector<int> counts;

  int at(int i, int j) const { return counts[static_cast<std::size_t>(j) * domain.nx + i]; }
};

SourceField rasterize_sources(const ParticleState& state, const DomainSpec& domain);

enum class ImplicitSolver { Fourier, ConjugateGradient };

class FieldSolverError : public std::runtime_error {
 public:
  FieldSolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Crank-Nicolson step for  df/dt = D lap f + xi * src - f  on the periodic grid.
// The decay term is removed by the integrating factor e^{-t} and applied once
// per step, which keeps the transformed variable bounded for long runs:
//
//   (I - a L) f' = e^{-dt} (I + a L) f + dt * xi * (1 + e^{-dt}) / 2 * src,
//
// with a = dt * D / 2 and L the 5-point periodic Laplacian. Sources are frozen
// at the start-of-step particle positions.
//
// Holds FFT plans and scratch buffers; one instance per simulation.
class CrankNicolsonSolver {
 public:
  explicit CrankNicolsonSolver(const DomainSpec& domain,
                               ImplicitSolver solver = ImplicitSolver::Fourier,
                               double cg_tolerance = 1e-12, int cg_max_iterations = 20000);
  ~CrankNicolsonSolver();
  CrankNicolsonSolver(const CrankNicolsonSolver&) = delete;
  CrankNicolsonSolver& operator=(const CrankNicolsonSolver&) = delete;
  CrankNicolsonSolver(CrankNicolsonSolver&&) noexcept;
  CrankNicolsonSolver& operator=(CrankNicolsonSolver&&) noexcept;

  ScalarField step(const ScalarField& field, const SourceField& src, const ModelParams& params,
                   double dt);

  // Stateful variant used by the coupled loop. With the Fourier solver the
  // field is kept in spectral form between steps, so a step costs a single
  // inverse transform while the sources are unchanged.
  void reset(const ScalarField& field);
  const ScalarField& advance(const SourceField& src, const ModelParams& params, double dt);
  const ScalarField& current() const { return current_; }

  const DomainSpec& domain() const { return domain_; }
  ImplicitSolver solver() const { return solver_; }

 private:
  struct FourierPlan;

  void solve_fourier(std::vector<double>& rhs, double a);
  void solve_cg(std::vector<double>& rhs, double a);

  DomainSpec domain_;
  ImplicitSolver solver_;
  double cg_tolerance_;
  int cg_max_iterations_;
  std::vector<double> laplacian_symbol_;
  std::unique_ptr<FourierPlan> plan_;

  ScalarField current_;
  std::vector<std::complex<double>> field_hat_;
  std::vector<std::complex<double>> source_hat_;
  std::vector<int> source_counts_;
  std::vector<double> field_gain_;
  std::vector<double> source_gain_;
  double cached_dt_ = 0.0;
  double cached_diffusion_ = 0.0;
  double cached_xi_ = 0.0;
};

ScalarField cn_step(const ScalarField& field, const SourceField& src, const ModelParams& params,
                    double dt, ImplicitSolver solver = ImplicitSolver::Fourier);

// 5-point periodic Laplacian applied to raw node values.
void apply_laplacian(const DomainSpec& domain, const std::vector<double>& in,
                     std::vector<double>& out);

enum class GradientStencil {
  Central,   // (f[m+1] - f[m-1]) / (2 dx)
  OneSided,  // (f[m+1] - f[m]) / (2 dx)
};

struct GradientField {
  ScalarField ddx;
  ScalarField ddy;
};

GradientField gradient_field(const ScalarField& field,
                             GradientStencil stencil = GradientStencil::Central);

enum class Interpolation { Bilinear, Nearest };

Vec2 sample_gradient(const GradientField& grad, const Vec2& x,
                     Interpolation interp = Interpolation::Bilinear);

// Same value as sample_gradient(gradient_field(field, stencil), x, interp), but
// only the stencils around x are evaluated.
Vec2 sample_gradient(const ScalarField& field, const Vec2& x,
                     GradientStencil stencil = GradientStencil::Central,
                     Interpolation interp = Interpolation::Bilinear);

// Bilinear interpolation of the node values at x (periodic).
double sample_field(const ScalarField& field, const Vec2& x);

// Snapshot text format:
//   nx ny
//   dx dy
//   time
//   ny lines of nx values (row j holds y = j*dy)
void write_snapshot(std::ostream& os, const ScalarField& field);
ScalarField read_snapshot(std::istream& is);

}  // namespace chemoflock
