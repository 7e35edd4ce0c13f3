#pragma once

#include <vector>

#include "rlab/gridfn.hpp"

namespace rlab {

/// Finite set of radii, each at least one grid step.
class RadiusSet {
 public:
  RadiusSet(std::vector<double> radii, double h);

  /// {2^m : h <= 2^m <= max_radius}.
  static RadiusSet dyadic(double h, double max_radius);
  /// {m h / 2 : m >= 2, m h / 2 <= max_radius}. At a cell centre the ball
  /// average is monotone between consecutive half-step radii, so this set
  /// realises the supremum over all radii in [h, max_radius].
  static RadiusSet dense(double h, double max_radius);

  const std::vector<double>& radii() const { return radii_; }
  size_t size() const { return radii_.size(); }
  bool contains(double r) const;

 private:
  std::vector<double> radii_;
};

/// Coordinatewise sup over r in J of the average of |f| over the ball B(xi, r),
/// at every cell centre xi. In d = 1 partially covered cells contribute their
/// covered fraction; in d = 2 a cell belongs to the ball when its centre does.
/// Outside the grid f is zero.
GridFunction maximal(const GridFunction& f, const RadiusSet& J);
/// The same quantity at an arbitrary point (d = 1).
Eigen::VectorXd maximal_at(const GridFunction& f, const RadiusSet& J, double xi);
/// ||M_J f||_p / ||f||_p.
double hl_operator_ratio(const GridFunction& f, const RadiusSet& J, const Exponent& p);

/// Lattice-valued function on (0, 2] with values in l^inf_{2^N}(l^2_N). Block k
/// holds the indicators of the dyadic pieces of (k 2^-N, k 2^-N + 1] within (0, 1].
struct CounterexampleInstance {
  int n = 2;
  Grid grid;          // (0, 2] with step 2^(-N-2)
  LatticeSpec spec;   // l^inf_{2^N}(l^2_N)
  /// When set, the finest coordinate also covers (k 2^-N, k 2^-N + 2^-N] so that ||f|| = 1.
  bool catch_all = true;

  Index blocks() const { return Index(1) << n; }
  /// Endpoints of the interval carried by coordinate (k, j), j = 1..N, before clipping to (0, 1].
  std::pair<double, double> interval(Index k, int j) const;
  /// Block k as an l^2_N-valued grid function.
  GridFunction block(Index k) const;
  /// The whole function (memory grows like 4^N).
  GridFunction materialize() const;
};

CounterexampleInstance build_counterexample(int n, bool catch_all = true);

struct CounterexampleEvaluation {
  int n = 0;
  double f_norm = 0.0;
  double maximal_norm = 0.0;
  double ratio = 0.0;
  double lower_bound = 0.0;
  /// ||M f(t)||^2 at every cell centre.
  Eigen::VectorXd pointwise_sq;
  /// Minimum of pointwise_sq over centres in (2^-N + 2h, 1 - 2h).
  double window_min_sq = 0.0;
};

/// L^2 evaluation that streams over the l^inf blocks instead of materialising them.
CounterexampleEvaluation evaluate_counterexample(const CounterexampleInstance& inst, const RadiusSet& J);
/// sqrt(N)/4 * (1 - 2^-N)^(1/2).
double counterexample_lower_bound(int n);

}  // namespace rlab
