#pragma once

#include <random>
#include <vector>

#include "chemoflock/model.hpp"

namespace testing_helpers {

inline chemoflock::ParticleState make_state(std::vector<chemoflock::Vec2> x,
                                            std::vector<chemoflock::Vec2> v,
                                            std::size_t leaders) {
  chemoflock::ParticleState s;
  s.positions = std::move(x);
  s.velocities = std::move(v);
  for (std::size_t i = 0; i < s.positions.size(); ++i)
    s.roles.push_back(i < leaders ? chemoflock::Role::Leader : chemoflock::Role::Follower);
  return s;
}

inline chemoflock::ParticleState random_state(std::size_t n, std::size_t leaders,
                                              const chemoflock::DomainSpec& d, unsigned seed,
                                              double vmax = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> ux(0.0, d.lx), uy(0.0, d.ly), uv(-vmax, vmax);
  std::vector<chemoflock::Vec2> x, v;
  for (std::size_t i = 0; i < n; ++i) {
    x.emplace_back(ux(gen), uy(gen));
    v.emplace_back(uv(gen), uv(gen));
  }
  return make_state(std::move(x), std::move(v), leaders);
}

}  // namespace testing_helpers
