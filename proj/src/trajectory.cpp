#include "chemoflock/trajectory.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace chemoflock {

TrajectoryRecord TrajectoryRecord::stationary(std::vector<Vec2> positions, std::vector<Role> roles,
                                              double t_end) {
  if (!(t_end > 0.0)) throw InvalidParameter("stationary trajectory needs t_end > 0");
  TrajectoryRecord r;
  r.times = {0.0, t_end};
  r.positions = {positions, positions};
  r.roles = std::move(roles);
  r.validate();
  return r;
}

Vec2 TrajectoryRecord::position_at(std::size_t particle, double t) const {
  if (times.size() == 1 || t <= times.front()) return positions.front()[particle];
  if (t >= times.back()) return positions.back()[particle];
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times.begin());
  const double t0 = times[k - 1];
  const double t1 = times[k];
  const double s = (t - t0) / (t1 - t0);
  return (1.0 - s) * positions[k - 1][particle] + s * positions[k][particle];
}

void TrajectoryRecord::validate() const {
  if (times.empty()) throw InvalidParameter("trajectory: no samples");
  if (times.front() != 0.0) throw InvalidParameter("trajectory: first sample must be at t = 0");
  if (positions.size() != times.size()) throw InvalidParameter("trajectory: sample count mismatch");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw InvalidParameter("trajectory: times must increase");
  for (const auto& p : positions)
    if (p.size() != roles.size()) throw InvalidParameter("trajectory: particle count mismatch");
}

TrajectoryRecord unwrap(const TrajectoryRecord& traj, const DomainSpec& domain) {
  TrajectoryRecord out = traj;
  for (std::size_t k = 1; k < out.times.size(); ++k)
    for (std::size_t j = 0; j < out.particles(); ++j)
      out.positions[k][j] =
          out.positions[k - 1][j] + domain.min_image(traj.positions[k][j] - traj.positions[k - 1][j]);
  return out;
}

void write_trajectory(std::ostream& os, const TrajectoryFile& file) {
  const auto& p = file.params;
  const auto& d = file.domain;
  const auto& r = file.record;
  os << std::setprecision(17);
  os << "# chemoflock-trajectory 1\n";
  os << "# params beta=" << p.beta << " sigma=" << p.sigma << " gamma=" << p.gamma
     << " diffusion=" << p.diffusion << " xi=" << p.xi << '\n';
  os << "# domain lx=" << d.lx << " ly=" << d.ly << " nx=" << d.nx << " ny=" << d.ny << '\n';
  os << "# roles ";
  for (Role role : r.roles) os << (role == Role::Leader ? 'L' : 'F');
  os << "\nt";
  for (std::size_t j = 0; j < r.particles(); ++j) os << ",x" << j << ",y" << j;
  os << '\n';
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    os << r.times[k];
    for (const Vec2& x : r.positions[k]) os << ',' << x.x() << ',' << x.y();
    os << '\n';
  }
}

namespace {

std::map<std::string, std::string> parse_pairs(std::istringstream& ss) {
  std::map<std::string, std::string> kv;
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::runtime_error("trajectory: bad header token " + tok);
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

double number(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw std::runtime_error("trajectory: missing header key " + key);
  return std::stod(it->second);
}

}  // namespace

TrajectoryFile read_trajectory(std::istream& is) {
  TrajectoryFile file;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# chemoflock-trajectory", 0) != 0)
    throw std::runtime_error("trajectory: missing signature line");
  bool have_params = false, have_domain = false, have_roles = false;
  while (std::getline(is, line) && line.rfind("#", 0) == 0) {
    std::istringstream ss(line.substr(1));
    std::string kind;
    ss >> kind;
    if (kind == "params") {
      const auto kv = parse_pairs(ss);
      file.params.beta = number(kv, "beta");
      file.params.sigma = number(kv, "sigma");
      file.params.gamma = number(kv, "gamma");
      file.params.diffusion = number(kv, "diffusion");
      file.params.xi = number(kv, "xi");
      have_params = true;
    } else if (kind == "domain") {
      const auto kv = parse_pairs(ss);
      file.domain.lx = number(kv, "lx");
      file.domain.ly = number(kv, "ly");
      file.domain.nx = static_cast<int>(number(kv, "nx"));
      file.domain.ny = static_cast<int>(number(kv, "ny"));
      have_domain = true;
    } else if (kind == "roles") {
      std::string roles;
      ss >> roles;
      for (char c : roles) {
        if (c != 'L' && c != 'F') throw std::runtime_error("trajectory: bad role flag");
        file.record.roles.push_back(c == 'L' ? Role::Leader : Role::Follower);
      }
      have_roles = true;
    }
  }
  if (!have_params || !have_domain || !have_roles)
    throw std::runtime_error("trajectory: incomplete header");
  // `line` now holds the column header.
  const std::size_t n = file.record.roles.size();
  file.params.n_particles = n;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double t = 0.0;
    if (!(ss >> t)) throw std::runtime_error("trajectory: malformed row");
    std::vector<Vec2> xs(n);
    for (auto& x : xs)
      if (!(ss >> x.x() >> x.y())) throw std::runtime_error("trajectory: short row");
    file.record.times.push_back(t);
    file.record.positions.push_back(std::move(xs));
  }
  file.params.validate();
  file.domain.validate();
  file.record.validate();
  return file;
}

}  // namespace chemoflock
