#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace trigf {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // achieved error estimate
};

struct QuadratureError : std::runtime_error {
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_tolerance(achieved) {}
  double achieved_tolerance;
};

// Adaptive Gauss-Kronrod 7-15 on [a, b]. Bisects the interval with the worst
// error estimate until the summed estimate is below abs_tol (or rel_tol
// relative to the running value). Throws QuadratureError if the interval
// budget is exhausted first.
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double abs_tol = 1e-12,
                           double rel_tol = 1e-12, int max_intervals = 4000);

}  // namespace trigf
