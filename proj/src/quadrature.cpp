#include "rlab/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace rlab {

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int max_depth) {
  if (b <= a) return 0.0;
  // A fixed first split keeps narrow features from hiding between the initial nodes.
  constexpr int kPieces = 16;
  double total = 0.0;
  const double w = (b - a) / kPieces;
  for (int i = 0; i < kPieces; ++i) {
    const double lo = a + i * w, hi = (i + 1 == kPieces) ? b : a + (i + 1) * w;
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_step(f, lo, hi, fa, fm, fb, whole, tol / kPieces, max_depth);
  }
  return total;
}

double integrate_to_infinity(const std::function<double(double)>& f, double a, double tol) {
  auto g = [&](double u) {
    if (u >= 1.0) return 0.0;
    const double v = 1.0 - u;
    const double val = f(a + u / v) / (v * v);
    return std::isfinite(val) ? val : 0.0;
  };
  return adaptive_simpson(g, 0.0, 1.0, tol);
}

double integrate_half_line(const std::function<double(double)>& f, std::vector<double> breaks, double tol) {
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [](double b) { return !(b > 0); }), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double total = 0.0, lo = 0.0;
  for (double b : breaks) {
    total += adaptive_simpson(f, lo, b, tol);
    lo = b;
  }
  return total + integrate_to_infinity(f, lo, tol);
}

}  // namespace rlab
