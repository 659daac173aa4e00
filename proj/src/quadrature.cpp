#include "chemoflock/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "chemoflock/model.hpp"

namespace chemoflock {

void QuadratureSpec::validate() const {
  if (!(tol_rel > 0.0 && tol_rel <= 1e-2)) throw InvalidParameter("tol_rel must lie in (0, 1e-2]");
  if (max_subdivisions < 8) throw InvalidParameter("max_subdivisions must be at least 8");
}

namespace {

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err);
  // With max_depth = 0 Boost reports the error of the rule on the reference
  // interval [-1, 1]; rescale it to [a, b].
  return {a, b, v, err * 0.5 * (b - a)};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec, double abs_tol,
                           std::span<const double> breakpoints) {
  spec.validate();
  if (a == b) return {};
  if (!(a < b)) {
    QuadratureResult r = integrate(f, b, a, spec, abs_tol, breakpoints);
    r.value = -r.value;
    return r;
  }

  std::vector<double> edges{a};
  std::vector<double> inner(breakpoints.begin(), breakpoints.end());
  std::sort(inner.begin(), inner.end());
  for (double p : inner)
    if (p > edges.back() && p < b) edges.push_back(p);
  edges.push_back(b);

  std::priority_queue<Panel> queue;
  double total = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    Panel p = gk15(f, edges[i], edges[i + 1]);
    total += p.value;
    error += p.error;
    queue.push(p);
  }

  int splits = 0;
  auto target = [&] { return std::max(spec.tol_rel * std::abs(total), abs_tol); };
  while (error > target()) {
    if (splits >= spec.max_subdivisions)
      throw QuadratureError("adaptive quadrature: subdivision limit reached", total, error);
    const Panel worst = queue.top();
    const double mid = 0.5 * (worst.a + worst.b);
    // Panels narrower than rounding cannot be refined further.
    if (!(mid > worst.a && mid < worst.b))
      throw QuadratureError("adaptive quadrature: panel below machine resolution", total, error);
    queue.pop();
    const Panel left = gk15(f, worst.a, mid);
    const Panel right = gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++splits;
  }

  // Re-sum from the panels so the running updates leave no cancellation error.
  total = 0.0;
  error = 0.0;
  while (!queue.empty()) {
    total += queue.top().value;
    error += queue.top().error;
    queue.pop();
  }
  return {total, error, splits};
}

}  // namespace chemoflock
