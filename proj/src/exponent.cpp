#include "rlab/exponent.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "rlab/errors.hpp"

namespace rlab {

Exponent::Exponent(double q) : q_(q) {
  if (!std::isfinite(q) || q < 1.0)
    throw InvalidArgument("exponent must be a finite number >= 1 (use Exponent::infinity())");
  if (q == 1.0) {
    conj_infinite_ = true;
    conj_ = 0.0;
  } else {
    conj_ = q / (q - 1.0);
  }
}

Exponent Exponent::infinity() {
  Exponent e;
  e.infinite_ = true;
  e.q_ = 0.0;
  e.conj_ = 1.0;
  e.conj_infinite_ = false;
  return e;
}

Exponent Exponent::parse(std::string_view text) {
  if (text == "inf" || text == "infty" || text == "infinity") return infinity();
  double q = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), q);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw InvalidArgument("cannot parse exponent '" + std::string(text) + "'");
  return Exponent(q);
}

double Exponent::value() const {
  return infinite_ ? std::numeric_limits<double>::infinity() : q_;
}

Exponent Exponent::conjugate() const {
  Exponent e = *this;
  std::swap(e.q_, e.conj_);
  std::swap(e.infinite_, e.conj_infinite_);
  return e;
}

Exponent Exponent::scaled(double factor) const {
  if (infinite_) return *this;
  return Exponent(q_ * factor);
}

std::string Exponent::to_string() const {
  if (infinite_) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << q_;
  return os.str();
}

}  // namespace rlab
