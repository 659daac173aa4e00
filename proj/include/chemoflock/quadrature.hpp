#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace chemoflock {

struct QuadratureSpec {
  double tol_rel = 1e-8;
  int max_subdivisions = 2000;

  void validate() const;
};

// Raised when the subdivision cap is hit before the tolerance is met.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate, double error_bound)
      : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}
  double estimate() const { return estimate_; }
  double error_bound() const { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
};

// Globally adaptive Gauss-Kronrod (7/15) integration of f over [a, b]: the
// panel with the largest error estimate is bisected until the summed error is
// below max(tol_rel * |I|, abs_tol). Interior breakpoints (kinks of f) seed
// the initial panels; points outside (a, b) are ignored.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec, double abs_tol = 0.0,
                           std::span<const double> breakpoints = {});

}  // namespace chemoflock
