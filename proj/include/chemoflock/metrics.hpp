#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "chemoflock/model.hpp"

namespace chemoflock {

struct MetricsSample {
  double t = 0.0;
  double fl_x = 0.0;       // sum_i |X_i - X_CM|^2
  double fl_v = 0.0;       // sum_i |V_i - V_CM|^2
  double v_cm_norm = 0.0;  // |V_CM|
  Vec2 x_cm = Vec2::Zero();
};

enum class Metric { FlX, FlV, MaxFluctuation, VcmNorm };

double metric_value(const MetricsSample& s, Metric m);

// Plain Euclidean center of mass and fluctuations.
MetricsSample compute_sample(double t, const ParticleState& state);

// Periodic version: the center of mass is a circular mean refined by
// minimum-image averaging, and displacements are measured by minimum image.
// For clusters smaller than a quarter of the domain this matches the plain one.
MetricsSample compute_sample(double t, const ParticleState& state, const DomainSpec& domain);

Vec2 periodic_center_of_mass(std::span<const Vec2> positions, const DomainSpec& domain);

// Earliest sample time t* with metric < threshold at t* and at every later
// sample; nullopt if the last sample is not below the threshold.
std::optional<double> crossing_time(std::span<const MetricsSample> series, Metric metric,
                                    double threshold);

// Earliest sample time with metric < threshold; nullopt if it never is.
std::optional<double> first_passage_time(std::span<const MetricsSample> series, Metric metric,
                                         double threshold);

// Least-squares slope of the metric against time over samples in [t_lo, t_hi].
double trend_slope(std::span<const MetricsSample> series, Metric metric, double t_lo,
                   double t_hi);

// CSV with header t,fl_x,fl_v,v_cm_norm,x_cm_x,x_cm_y at 17 significant digits.
void write_metrics_csv(std::ostream& os, std::span<const MetricsSample> series);
std::vector<MetricsSample> read_metrics_csv(std::istream& is);

}  // namespace chemoflock
