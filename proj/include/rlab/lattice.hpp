#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlab/errors.hpp"
#include "rlab/exponent.hpp"

namespace rlab {

using Eigen::Index;

/// One level l^q_M of a mixed-norm stack.
struct Level {
  Exponent q;
  Index dim = 1;
  friend bool operator==(const Level&, const Level&) = default;
};

/// Mixed-norm lattice l^{q1}_{M1}(l^{q2}_{M2}(...)), outermost level first.
/// Coordinates are stored row-major: the innermost index varies fastest.
class LatticeSpec {
 public:
  LatticeSpec();
  explicit LatticeSpec(std::vector<Level> levels);

  /// The one-dimensional lattice l^2_1, i.e. the real line.
  static LatticeSpec scalar();
  /// Grammar: spec := 'l' exponent '(' dim [ ',' spec ] ')', exponent := number | 'inf'.
  static LatticeSpec parse(std::string_view text);

  const std::vector<Level>& levels() const { return levels_; }
  Index depth() const { return static_cast<Index>(levels_.size()); }
  Index total_dim() const { return total_; }

  LatticeSpec dual() const;
  /// Divides every exponent by s; every exponent must be >= s.
  LatticeSpec concavify(double s) const;
  /// Multiplies every exponent by s.
  LatticeSpec convexify(double s) const;
  LatticeSpec with_inner(Level level) const;
  LatticeSpec with_outer(Level level) const;

  bool all_finite() const;
  /// True when no level has exponent 1 or infinity.
  bool strictly_convex() const;

  std::string to_string() const;

  friend bool operator==(const LatticeSpec& a, const LatticeSpec& b) { return a.levels_ == b.levels_; }

 private:
  std::vector<Level> levels_;
  Index total_ = 1;
};

/// l^q norm of n values; infinity is the max of absolute values.
double lq_norm(const double* data, Index n, const Exponent& q);

/// Norm of a raw coordinate array under `spec`, evaluated innermost-out.
double norm(const LatticeSpec& spec, std::span<const double> coords);

template <class Derived>
double norm(const LatticeSpec& spec, const Eigen::DenseBase<Derived>& x) {
  if constexpr (bool(Derived::Flags & Eigen::DirectAccessBit) && Derived::InnerStrideAtCompileTime == 1) {
    if (x.derived().outerStride() == x.derived().innerSize() || x.rows() == 1 || x.cols() == 1)
      return norm(spec, std::span<const double>(x.derived().data(), static_cast<size_t>(x.size())));
  }
  Eigen::VectorXd tmp = x.derived().reshaped();
  return norm(spec, std::span<const double>(tmp.data(), static_cast<size_t>(tmp.size())));
}

/// The extremal functional x* in X* with <x, x*> = ||x|| and ||x*||_{X*} <= 1
/// (equal to 1 unless x = 0). Built top-down from the Hoelder equality cases.
Eigen::VectorXd norming_functional(const LatticeSpec& spec, std::span<const double> coords);

template <class Derived>
Eigen::VectorXd norming_functional(const LatticeSpec& spec, const Eigen::DenseBase<Derived>& x) {
  Eigen::VectorXd tmp = x.derived().reshaped();
  return norming_functional(spec, std::span<const double>(tmp.data(), static_cast<size_t>(tmp.size())));
}

/// An element of a lattice.
struct LatticeVec {
  LatticeSpec spec;
  Eigen::VectorXd coords;

  LatticeVec() = default;
  LatticeVec(LatticeSpec s, Eigen::VectorXd c);
  static LatticeVec zero(const LatticeSpec& s) { return {s, Eigen::VectorXd::Zero(s.total_dim())}; }

  double norm() const { return rlab::norm(spec, coords); }
};

/// ||(sum_n |x_n|^s)^{1/s}||_X, with the pointwise sup for s = infinity.
double mixed_seq_norm(std::span<const LatticeVec> xs, const Exponent& s);

/// Coordinatewise l^s combination of equally long coordinate arrays.
Eigen::VectorXd pointwise_lq(std::span<const Eigen::VectorXd> xs, const Exponent& s);

/// Coordinatewise (Krivine) calculus.
namespace krivine {
LatticeVec abs(const LatticeVec& x);
/// |x|^theta for nonnegative x; negative coordinates are rejected.
LatticeVec power(const LatticeVec& x, double theta);
LatticeVec sup(std::span<const LatticeVec> xs);
LatticeVec sum(std::span<const LatticeVec> xs);
LatticeVec product(std::span<const LatticeVec> xs);
}  // namespace krivine

}  // namespace rlab
