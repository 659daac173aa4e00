#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace chemoflock {

using Vec2 = Eigen::Vector2d;

class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dimensionless parameters. The signal decay rate and the particle radius are
// both 1 after rescaling, so they do not appear here.
struct ModelParams {
  double beta = 0.0;       // alignment strength
  double sigma = 0.0;      // communication decay exponent
  double gamma = 0.0;      // chemotactic sensitivity
  double diffusion = 1.0;  // signal diffusion coefficient
  double xi = 0.0;         // signal production rate
  std::size_t n_particles = 1;

  void validate() const;
};

// Physical parameter set prior to rescaling by eta (signal decay rate),
// the particle radius and the maximum signal concentration.
struct DimensionalParams {
  double beta = 0.0;
  double sigma = 0.0;
  double gamma = 0.0;
  double diffusion = 1.0;
  double xi = 0.0;
  double eta = 1.0;
  double radius = 1.0;
  double f_max = 1.0;
  std::size_t n_particles = 1;
};

struct Nondimensionalized {
  ModelParams params;
  double time_unit = 1.0;    // physical time per dimensionless time unit (1/eta)
  double length_unit = 1.0;  // physical length per dimensionless length unit (R)
  double signal_unit = 1.0;  // physical concentration per dimensionless unit (f_max)
};

Nondimensionalized nondimensionalize(const DimensionalParams& dim);

enum class Role : std::uint8_t { Leader, Follower };

struct ParticleState {
  std::vector<Vec2> positions;
  std::vector<Vec2> velocities;
  std::vector<Role> roles;

  std::size_t size() const { return positions.size(); }
  void validate() const;
};

enum class DistanceMode { MinimumImage, Euclidean };

// Periodic rectangle [0, lx) x [0, ly) discretised by nx x ny nodes at
// x_m = m*dx, y_n = n*dy.
struct DomainSpec {
  double lx = 50.0;
  double ly = 50.0;
  int nx = 200;
  int ny = 200;
  DistanceMode distance = DistanceMode::MinimumImage;

  double dx() const { return lx / nx; }
  double dy() const { return ly / ny; }
  std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }
  Vec2 center() const { return {0.5 * lx, 0.5 * ly}; }

  // a - b, folded to the nearest periodic image unless distance is Euclidean.
  Vec2 displacement(const Vec2& a, const Vec2& b) const;
  // Minimum-image displacement regardless of the distance mode.
  Vec2 min_image(const Vec2& d) const;
  // Maps p into [0, lx) x [0, ly).
  Vec2 wrap(const Vec2& p) const;

  void validate() const;
};

double alignment_weight(const Vec2& xi, const Vec2& xj, double sigma,
                        const DomainSpec& domain);

Vec2 alignment_force(std::size_t i, const ParticleState& state,
                     const ModelParams& params, const DomainSpec& domain);

}  // namespace chemoflock
