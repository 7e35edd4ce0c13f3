#pragma once

#include <string>
#include <string_view>

namespace rlab {

/// An exponent q in [1, inf]. Infinity is a separate state, never a large double.
class Exponent {
 public:
  Exponent() = default;
  Exponent(double q);  // NOLINT(google-explicit-constructor)

  static Exponent infinity();
  /// Accepts "2", "1.5", "inf".
  static Exponent parse(std::string_view text);

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }
  /// Finite value; +inf as a double for the infinite exponent.
  double value() const;
  bool is_one() const { return !infinite_ && q_ == 1.0; }

  /// Hoelder conjugate: 1/q + 1/q' = 1.
  Exponent conjugate() const;
  /// q * factor, with infinity fixed.
  Exponent scaled(double factor) const;

  std::string to_string() const;

  friend bool operator==(const Exponent& a, const Exponent& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.q_ == b.q_);
  }

 private:
  // The conjugate is carried along so that conjugate().conjugate() is exact.
  double q_ = 2.0;
  double conj_ = 2.0;
  bool infinite_ = false;
  bool conj_infinite_ = false;
};

}  // namespace rlab
