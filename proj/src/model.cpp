#include "chemoflock/model.hpp"

#include <cmath>
#include <string>

namespace chemoflock {

namespace {

bool finite(const Vec2& v) { return std::isfinite(v.x()) && std::isfinite(v.y()); }

double fold(double d, double period) { return d - period * std::round(d / period); }

double wrap_coordinate(double p, double period) {
  double w = p - period * std::floor(p / period);
  // p slightly below zero can round up to exactly period.
  if (w >= period) w = 0.0;
  return w;
}

}  // namespace

void ModelParams::validate() const {
  if (!(diffusion > 0.0)) throw InvalidParameter("diffusion must be positive");
  if (n_particles < 1) throw InvalidParameter("n_particles must be at least 1");
  if (!(beta >= 0.0) || !(sigma >= 0.0) || !(gamma >= 0.0) || !(xi >= 0.0))
    throw InvalidParameter("beta, sigma, gamma and xi must be nonnegative");
}

Nondimensionalized nondimensionalize(const DimensionalParams& dim) {
  if (!(dim.eta > 0.0)) throw InvalidParameter("eta must be positive");
  if (!(dim.radius > 0.0)) throw InvalidParameter("radius must be positive");
  if (!(dim.f_max > 0.0)) throw InvalidParameter("f_max must be positive");

  const double r2 = dim.radius * dim.radius;
  Nondimensionalized out;
  out.params.beta = dim.beta / dim.eta;
  out.params.sigma = dim.sigma;
  out.params.gamma = dim.gamma * dim.f_max / (r2 * dim.eta * dim.eta);
  out.params.diffusion = dim.diffusion / (r2 * dim.eta);
  out.params.xi = dim.xi / (dim.f_max * dim.eta);
  out.params.n_particles = dim.n_particles;
  out.time_unit = 1.0 / dim.eta;
  out.length_unit = dim.radius;
  out.signal_unit = dim.f_max;
  out.params.validate();
  return out;
}

void ParticleState::validate() const {
  if (velocities.size() != positions.size() || roles.size() != positions.size())
    throw InvalidParameter("positions, velocities and roles must have equal length");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!finite(positions[i]) || !finite(velocities[i]))
      throw InvalidParameter("non-finite particle state at index " + std::to_string(i));
  }
}

Vec2 DomainSpec::min_image(const Vec2& d) const { return {fold(d.x(), lx), fold(d.y(), ly)}; }

Vec2 DomainSpec::displacement(const Vec2& a, const Vec2& b) const {
  const Vec2 d = a - b;
  return distance == DistanceMode::MinimumImage ? min_image(d) : d;
}

Vec2 DomainSpec::wrap(const Vec2& p) const {
  return {wrap_coordinate(p.x(), lx), wrap_coordinate(p.y(), ly)};
}

void DomainSpec::validate() const {
  if (!(lx > 0.0) || !(ly > 0.0)) throw InvalidParameter("domain extent must be positive");
  if (nx < 4 || ny < 4) throw InvalidParameter("grid needs at least 4 nodes per axis");
}

double alignment_weight(const Vec2& xi, const Vec2& xj, double sigma,
                        const DomainSpec& domain) {
  const double d2 = domain.displacement(xi, xj).squaredNorm();
  return std::pow(1.0 + d2, -sigma);
}

Vec2 alignment_force(std::size_t i, const ParticleState& state, const ModelParams& params,
                     const DomainSpec& domain) {
  const std::size_t n = state.size();
  if (i >= n) throw std::out_of_range("alignment_force: particle index out of range");
  Vec2 acc = Vec2::Zero();
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const double w = alignment_weight(state.positions[i], state.positions[j], params.sigma, domain);
    acc += w * (state.velocities[j] - state.velocities[i]);
  }
  return (params.beta / static_cast<double>(n)) * acc;
}

}  // namespace chemoflock
