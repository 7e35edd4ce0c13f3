#pragma once

#include <functional>
#include <vector>

namespace rlab {

/// Adaptive Simpson rule on [a, b] with absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 48);

/// Integral over [a, inf) through the map t = a + u / (1 - u).
double integrate_to_infinity(const std::function<double(double)>& f, double a, double tol);

/// Integral over [0, inf), split at the given interior breakpoints.
double integrate_half_line(const std::function<double(double)>& f, std::vector<double> breaks, double tol);

}  // namespace rlab
