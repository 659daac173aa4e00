#include "chemoflock/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace chemoflock {

double metric_value(const MetricsSample& s, Metric m) {
  switch (m) {
    case Metric::FlX: return s.fl_x;
    case Metric::FlV: return s.fl_v;
    case Metric::MaxFluctuation: return std::max(s.fl_x, s.fl_v);
    case Metric::VcmNorm: return s.v_cm_norm;
  }
  return 0.0;
}

namespace {

Vec2 mean_velocity(const ParticleState& state) {
  Vec2 v = Vec2::Zero();
  for (const Vec2& vi : state.velocities) v += vi;
  return v / static_cast<double>(state.size());
}

double velocity_fluctuation(const ParticleState& state, const Vec2& v_cm) {
  double fl = 0.0;
  for (const Vec2& vi : state.velocities) fl += (vi - v_cm).squaredNorm();
  return fl;
}

double circular_mean(std::span<const Vec2> positions, int axis, double period) {
  double s = 0.0, c = 0.0;
  for (const Vec2& p : positions) {
    const double theta = 2.0 * std::numbers::pi * p[axis] / period;
    s += std::sin(theta);
    c += std::cos(theta);
  }
  if (s == 0.0 && c == 0.0) return positions.front()[axis];
  double a = std::atan2(s, c);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a * period / (2.0 * std::numbers::pi);
}

}  // namespace

MetricsSample compute_sample(double t, const ParticleState& state) {
  if (state.size() == 0) throw InvalidParameter("compute_sample: empty state");
  MetricsSample s;
  s.t = t;
  Vec2 x = Vec2::Zero();
  for (const Vec2& p : state.positions) x += p;
  s.x_cm = x / static_cast<double>(state.size());
  for (const Vec2& p : state.positions) s.fl_x += (p - s.x_cm).squaredNorm();
  const Vec2 v_cm = mean_velocity(state);
  s.fl_v = velocity_fluctuation(state, v_cm);
  s.v_cm_norm = v_cm.norm();
  return s;
}

Vec2 periodic_center_of_mass(std::span<const Vec2> positions, const DomainSpec& domain) {
  if (positions.empty()) throw InvalidParameter("periodic_center_of_mass: no positions");
  Vec2 c{circular_mean(positions, 0, domain.lx), circular_mean(positions, 1, domain.ly)};
  const double n = static_cast<double>(positions.size());
  for (int iter = 0; iter < 16; ++iter) {
    Vec2 shift = Vec2::Zero();
    for (const Vec2& p : positions) shift += domain.min_image(p - c);
    shift /= n;
    c += shift;
    if (shift.norm() <= 1e-15 * (domain.lx + domain.ly)) break;
  }
  return domain.wrap(c);
}

MetricsSample compute_sample(double t, const ParticleState& state, const DomainSpec& domain) {
  if (state.size() == 0) throw InvalidParameter("compute_sample: empty state");
  MetricsSample s;
  s.t = t;
  s.x_cm = periodic_center_of_mass(state.positions, domain);
  for (const Vec2& p : state.positions) s.fl_x += domain.min_image(p - s.x_cm).squaredNorm();
  const Vec2 v_cm = mean_velocity(state);
  s.fl_v = velocity_fluctuation(state, v_cm);
  s.v_cm_norm = v_cm.norm();
  return s;
}

std::optional<double> crossing_time(std::span<const MetricsSample> series, Metric metric,
                                    double threshold) {
  std::optional<double> t_star;
  for (auto it = series.rbegin(); it != series.rend(); ++it) {
    if (!(metric_value(*it, metric) < threshold)) break;
    t_star = it->t;
  }
  return t_star;
}

std::optional<double> first_passage_time(std::span<const MetricsSample> series, Metric metric,
                                         double threshold) {
  for (const auto& s : series)
    if (metric_value(s, metric) < threshold) return s.t;
  return std::nullopt;
}

double trend_slope(std::span<const MetricsSample> series, Metric metric, double t_lo,
                   double t_hi) {
  double st = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (const auto& s : series) {
    if (s.t < t_lo || s.t > t_hi) continue;
    st += s.t;
    sy += metric_value(s, metric);
    ++n;
  }
  if (n < 2) throw InvalidParameter("trend_slope: fewer than two samples in window");
  const double t_mean = st / n;
  const double y_mean = sy / n;
  double stt = 0.0, sty = 0.0;
  for (const auto& s : series) {
    if (s.t < t_lo || s.t > t_hi) continue;
    const double dt = s.t - t_mean;
    stt += dt * dt;
    sty += dt * (metric_value(s, metric) - y_mean);
  }
  if (stt == 0.0) throw InvalidParameter("trend_slope: samples share a single time");
  return sty / stt;
}

void write_metrics_csv(std::ostream& os, std::span<const MetricsSample> series) {
  os << "t,fl_x,fl_v,v_cm_norm,x_cm_x,x_cm_y\n";
  os << std::setprecision(17);
  for (const auto& s : series) {
    os << s.t << ',' << s.fl_x << ',' << s.fl_v << ',' << s.v_cm_norm << ',' << s.x_cm.x() << ','
       << s.x_cm.y() << '\n';
  }
}

std::vector<MetricsSample> read_metrics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "t,fl_x,fl_v,v_cm_norm,x_cm_x,x_cm_y")
    throw std::runtime_error("metrics csv: unexpected header");
  std::vector<MetricsSample> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    MetricsSample s;
    double cx = 0.0, cy = 0.0;
    if (!(ss >> s.t >> s.fl_x >> s.fl_v >> s.v_cm_norm >> cx >> cy))
      throw std::runtime_error("metrics csv: malformed row");
    s.x_cm = {cx, cy};
    out.push_back(s);
  }
  return out;
}

}  // namespace chemoflock
