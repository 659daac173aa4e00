#pragma once

#include <iosfwd>
#include <vector>

#include "chemoflock/model.hpp"

namespace chemoflock {

// Particle positions sampled in time, linearly interpolated in between.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<std::vector<Vec2>> positions;
  std::vector<Role> roles;

  // Two samples at t = 0 and t = t_end with the particles at rest.
  static TrajectoryRecord stationary(std::vector<Vec2> positions, std::vector<Role> roles,
                                     double t_end);

  std::size_t particles() const { return roles.size(); }
  double end_time() const { return times.empty() ? 0.0 : times.back(); }
  Vec2 position_at(std::size_t particle, double t) const;
  void validate() const;
};

// Removes periodic jumps between consecutive samples so each path is continuous.
TrajectoryRecord unwrap(const TrajectoryRecord& traj, const DomainSpec& domain);

// Self-describing trajectory file: '#' header lines carrying the parameters and
// domain, then CSV rows t,x0,y0,x1,y1,...
struct TrajectoryFile {
  ModelParams params;
  DomainSpec domain;
  TrajectoryRecord record;
};

void write_trajectory(std::ostream& os, const TrajectoryFile& file);
TrajectoryFile read_trajectory(std::istream& is);

}  // namespace chemoflock
