#pragma once

#include <functional>
#include <span>

namespace tfheat::quad {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/// Adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
/// Subdivides the interval with the largest error estimate until
/// error <= max(abs_tol, rel_tol * |value|) or the interval budget runs out.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-13, double abs_tol = 0.0,
                     int max_intervals = 2000);

/// Same as integrate() but with the interval pre-split at the given
/// breakpoints (sorted, inside (a, b)).
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     std::span<const double> breakpoints, double rel_tol = 1e-13,
                     double abs_tol = 0.0, int max_intervals = 2000);

}  // namespace tfheat::quad
