#pragma once

#include <functional>

namespace gyrad::quad {

struct Result {
  double value = 0.0;
  double abs_error = 0.0;  // accumulated error estimate
  long evals = 0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod 7-15 on a finite interval.  Splits the worst
// subinterval until the summed error estimate meets
// max(abs_tol, rel_tol * |integral|) or the interval budget runs out.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double abs_tol, int max_intervals = 2000);

}  // namespace gyrad::quad
