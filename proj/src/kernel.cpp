#include "rlab/kernel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "rlab/errors.hpp"
#include "rlab/quadrature.hpp"

namespace rlab {

namespace {

constexpr double kPi = std::numbers::pi;

bool near(double t, double x) { return std::abs(t - x) <= 1e-12 * std::max(1.0, std::abs(x)); }

double power_constant(double alpha, double eps) {
  return (alpha - 1.0) * std::pow(eps, alpha - 1.0) / (2.0 * alpha);
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

double parse_number(std::string_view s, std::string_view whole) {
  try {
    size_t used = 0;
    const double v = std::stod(std::string(s), &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("kernel '" + std::string(whole) + "': cannot parse number '" + std::string(s) + "'");
  }
}

}  // namespace

ClosedForm ClosedForm::exponential(double lambda) {
  if (!(lambda > 0)) throw InvalidArgument("exponential kernel needs lambda > 0");
  return {KernelType::Exponential, lambda, 0.0, {}, {}, 1.0};
}

ClosedForm ClosedForm::gaussian(double sigma) {
  if (!(sigma > 0)) throw InvalidArgument("gaussian kernel needs sigma > 0");
  return {KernelType::Gaussian, sigma, 0.0, {}, {}, 1.0};
}

ClosedForm ClosedForm::poisson(double a) {
  if (!(a > 0)) throw InvalidArgument("poisson kernel needs a > 0");
  return {KernelType::Poisson, a, 0.0, {}, {}, 1.0};
}

ClosedForm ClosedForm::indicator(double a, double b) {
  if (!(b > a)) throw InvalidArgument("indicator kernel needs a < b");
  return {KernelType::Indicator, a, b, {}, {}, 1.0};
}

ClosedForm ClosedForm::power(double alpha, double eps) {
  if (!(alpha > 1) || !(eps > 0)) throw InvalidArgument("power kernel needs alpha > 1 and eps > 0");
  return {KernelType::Power, alpha, eps, {}, {}, 1.0};
}

ClosedForm ClosedForm::one_sided_exponential(double lambda) {
  if (!(lambda > 0)) throw InvalidArgument("one-sided exponential needs lambda > 0");
  return {KernelType::OneSidedExponential, lambda, 0.0, {}, {}, 1.0};
}

ClosedForm ClosedForm::exp_sum(std::vector<double> coeffs, std::vector<double> rates) {
  if (coeffs.size() != rates.size() || coeffs.empty())
    throw InvalidArgument("exponential sum needs matching nonempty coefficient and rate lists");
  for (double a : rates)
    if (!(a > 0)) throw InvalidArgument("exponential sum rates must be positive");
  ClosedForm f{KernelType::ExpSum, 0.0, 0.0, std::move(coeffs), std::move(rates), 1.0};
  return f;
}

ClosedForm ClosedForm::parse(std::string_view text) {
  std::string_view body = text;
  double scale = 1.0;
  if (auto star = text.find('*'); star != std::string_view::npos) {
    scale = parse_number(text.substr(0, star), text);
    body = text.substr(star + 1);
  }
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    const size_t colon = body.find(':', start);
    parts.push_back(body.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  const std::string_view name = parts[0];
  auto arg = [&](size_t i) {
    if (i >= parts.size()) throw InvalidArgument("kernel '" + std::string(text) + "': missing parameter");
    return parse_number(parts[i], text);
  };
  auto expect_args = [&](size_t n) {
    if (parts.size() != n + 1)
      throw InvalidArgument("kernel '" + std::string(text) + "': expected " + std::to_string(n) + " parameter(s)");
  };
  ClosedForm f;
  if (name == "exp") {
    expect_args(1);
    f = exponential(arg(1));
  } else if (name == "gauss") {
    expect_args(1);
    f = gaussian(arg(1));
  } else if (name == "poisson") {
    expect_args(1);
    f = poisson(arg(1));
  } else if (name == "ind") {
    expect_args(2);
    f = indicator(arg(1), arg(2));
  } else if (name == "power") {
    expect_args(2);
    f = power(arg(1), arg(2));
  } else if (name == "oexp") {
    expect_args(1);
    f = one_sided_exponential(arg(1));
  } else if (name == "expsum") {
    if (parts.size() < 3 || parts.size() % 2 == 0)
      throw InvalidArgument("kernel '" + std::string(text) + "': expsum takes coefficient:rate pairs");
    std::vector<double> c, a;
    for (size_t i = 1; i < parts.size(); i += 2) {
      c.push_back(arg(i));
      a.push_back(arg(i + 1));
    }
    f = exp_sum(std::move(c), std::move(a));
  } else {
    throw InvalidArgument("unknown kernel family '" + std::string(name) + "'");
  }
  return f.scaled(scale);
}

ClosedForm ClosedForm::scaled(double c) const {
  ClosedForm f = *this;
  f.scale *= c;
  return f;
}

std::string ClosedForm::to_string() const {
  std::string s;
  switch (type) {
    case KernelType::Exponential: s = "exp:" + num(p1); break;
    case KernelType::Gaussian: s = "gauss:" + num(p1); break;
    case KernelType::Poisson: s = "poisson:" + num(p1); break;
    case KernelType::Indicator: s = "ind:" + num(p1) + ":" + num(p2); break;
    case KernelType::Power: s = "power:" + num(p1) + ":" + num(p2); break;
    case KernelType::OneSidedExponential: s = "oexp:" + num(p1); break;
    case KernelType::ExpSum:
      s = "expsum";
      for (size_t i = 0; i < coeffs.size(); ++i) s += ":" + num(coeffs[i]) + ":" + num(rates[i]);
      break;
  }
  return scale == 1.0 ? s : num(scale) + "*" + s;
}

bool ClosedForm::supports_dim(int d) const {
  if (d == 1) return true;
  return d == 2 && (type == KernelType::Exponential || type == KernelType::Gaussian || type == KernelType::Poisson);
}

bool ClosedForm::radial() const {
  switch (type) {
    case KernelType::Exponential:
    case KernelType::Gaussian:
    case KernelType::Poisson:
    case KernelType::Power: return true;
    case KernelType::Indicator: return p1 == -p2;
    default: return false;
  }
}

bool ClosedForm::one_sided() const {
  return type == KernelType::OneSidedExponential || type == KernelType::ExpSum ||
         (type == KernelType::Indicator && p1 >= 0.0);
}

bool ClosedForm::differentiable() const { return type != KernelType::Indicator; }

double ClosedForm::eval(double t) const {
  double v = 0.0;
  switch (type) {
    case KernelType::Exponential: v = 0.5 * p1 * std::exp(-p1 * std::abs(t)); break;
    case KernelType::Gaussian: v = std::exp(-0.5 * t * t / (p1 * p1)) / (p1 * std::sqrt(2.0 * kPi)); break;
    case KernelType::Poisson: v = p1 / (kPi * (p1 * p1 + t * t)); break;
    case KernelType::Indicator:
      if (near(t, p1) || near(t, p2)) v = 0.5;
      else v = (t > p1 && t < p2) ? 1.0 : 0.0;
      break;
    case KernelType::Power: v = power_constant(p1, p2) * std::pow(std::max(std::abs(t), p2), -p1); break;
    case KernelType::OneSidedExponential: v = t > 0 ? std::exp(-p1 * t) : (t == 0 ? 0.5 : 0.0); break;
    case KernelType::ExpSum:
      if (t >= 0) {
        for (size_t i = 0; i < coeffs.size(); ++i) v += coeffs[i] * std::exp(-rates[i] * t);
        if (t == 0) v *= 0.5;
      }
      break;
  }
  return scale * v;
}

double ClosedForm::eval(double x, double y) const {
  if (!supports_dim(2)) throw InvalidArgument("kernel " + to_string() + " has no two-dimensional form");
  const double r2 = x * x + y * y, r = std::sqrt(r2);
  double v = 0.0;
  switch (type) {
    case KernelType::Exponential: v = p1 * p1 / (2.0 * kPi) * std::exp(-p1 * r); break;
    case KernelType::Gaussian: v = std::exp(-0.5 * r2 / (p1 * p1)) / (2.0 * kPi * p1 * p1); break;
    case KernelType::Poisson: v = p1 / (2.0 * kPi * std::pow(p1 * p1 + r2, 1.5)); break;
    default: break;
  }
  return scale * v;
}

double ClosedForm::derivative(double t, int d) const {
  if (d == 2) {
    const double r = std::abs(t);
    double v = 0.0;
    switch (type) {
      case KernelType::Exponential: v = -p1 * p1 * p1 / (2.0 * kPi) * std::exp(-p1 * r); break;
      case KernelType::Gaussian: v = -r / (p1 * p1) * std::exp(-0.5 * r * r / (p1 * p1)) / (2.0 * kPi * p1 * p1); break;
      case KernelType::Poisson: v = -3.0 * p1 * r / (2.0 * kPi * std::pow(p1 * p1 + r * r, 2.5)); break;
      default: throw InvalidArgument("kernel " + to_string() + " has no two-dimensional form");
    }
    return scale * v;
  }
  const double sg = t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0);
  double v = 0.0;
  switch (type) {
    case KernelType::Exponential: v = -0.5 * p1 * p1 * sg * std::exp(-p1 * std::abs(t)); break;
    case KernelType::Gaussian: v = -t / (p1 * p1) * std::exp(-0.5 * t * t / (p1 * p1)) / (p1 * std::sqrt(2.0 * kPi)); break;
    case KernelType::Poisson: v = -2.0 * p1 * t / (kPi * std::pow(p1 * p1 + t * t, 2)); break;
    case KernelType::Indicator: v = 0.0; break;
    case KernelType::Power:
      v = std::abs(t) < p2 ? 0.0 : -power_constant(p1, p2) * p1 * sg * std::pow(std::abs(t), -p1 - 1.0);
      break;
    case KernelType::OneSidedExponential: v = t > 0 ? -p1 * std::exp(-p1 * t) : 0.0; break;
    case KernelType::ExpSum:
      if (t > 0)
        for (size_t i = 0; i < coeffs.size(); ++i) v -= coeffs[i] * rates[i] * std::exp(-rates[i] * t);
      break;
  }
  return scale * v;
}

double ClosedForm::l1(int d) const {
  if (!supports_dim(d)) throw InvalidArgument("kernel " + to_string() + " unsupported in this dimension");
  const double s = std::abs(scale);
  switch (type) {
    case KernelType::Indicator: return s * (p2 - p1);
    case KernelType::OneSidedExponential: return s / p1;
    case KernelType::ExpSum: {
      bool positive = true;
      double total = 0.0;
      for (size_t i = 0; i < coeffs.size(); ++i) {
        positive = positive && coeffs[i] >= 0;
        total += coeffs[i] / rates[i];
      }
      if (positive) return s * total;
      ClosedForm unit = *this;
      unit.scale = 1.0;
      return s * integrate_half_line([&](double t) { return std::abs(unit.eval(t)); }, {}, 1e-12);
    }
    default: return s;
  }
}

double ClosedForm::tail_mass(double r, int d) const {
  if (r <= 0) return l1(d);
  const double s = std::abs(scale);
  if (d == 2) {
    switch (type) {
      case KernelType::Exponential: return s * (1.0 + p1 * r) * std::exp(-p1 * r);
      case KernelType::Gaussian: return s * std::exp(-0.5 * r * r / (p1 * p1));
      case KernelType::Poisson: return s * p1 / std::sqrt(p1 * p1 + r * r);
      default: throw InvalidArgument("kernel " + to_string() + " has no two-dimensional form");
    }
  }
  switch (type) {
    case KernelType::Exponential: return s * std::exp(-p1 * r);
    case KernelType::Gaussian: return s * std::erfc(r / (p1 * std::sqrt(2.0)));
    case KernelType::Poisson: return s * (1.0 - 2.0 / kPi * std::atan(r / p1));
    case KernelType::Indicator:
      return s * (std::max(0.0, p2 - std::max(p1, r)) + std::max(0.0, std::min(p2, -r) - p1));
    case KernelType::Power: {
      const double c = power_constant(p1, p2);
      if (r >= p2) return s * 2.0 * c * std::pow(r, 1.0 - p1) / (p1 - 1.0);
      return s * (1.0 - 2.0 * c * std::pow(p2, -p1) * r);
    }
    case KernelType::OneSidedExponential: return s * std::exp(-p1 * r) / p1;
    case KernelType::ExpSum: {
      double t = 0.0;
      for (size_t i = 0; i < coeffs.size(); ++i) t += std::abs(coeffs[i]) * std::exp(-rates[i] * r) / rates[i];
      return s * t;
    }
  }
  return 0.0;
}

double ClosedForm::majorant_tail(double r, int d) const {
  const double s = std::abs(scale);
  switch (type) {
    case KernelType::Indicator:
      return s * 2.0 * std::max(0.0, std::max(std::abs(p1), std::abs(p2)) - std::max(r, 0.0));
    case KernelType::OneSidedExponential:
    case KernelType::ExpSum: return 2.0 * tail_mass(r, d);
    case KernelType::Power:
      if (r < p2) return tail_mass(p2, d) + s * 2.0 * power_constant(p1, p2) * std::pow(p2, -p1) * (p2 - std::max(r, 0.0));
      return tail_mass(r, d);
    default: return tail_mass(r, d);
  }
}

std::vector<double> ClosedForm::breakpoints() const {
  switch (type) {
    case KernelType::Power: return {p2};
    case KernelType::Indicator: return {std::abs(p1), std::abs(p2)};
    default: return {};
  }
}

Kernel Kernel::sample(const ClosedForm& form, int d, double h, Index radius) {
  if (!form.supports_dim(d)) throw InvalidArgument("kernel " + form.to_string() + " unsupported in d=" + std::to_string(d));
  Kernel k = from_function(
      [&](double x, double y) { return d == 1 ? form.eval(x) : form.eval(x, y); }, d, h, radius, std::nullopt,
      form.to_string());
  k.form_ = form;
  return k;
}

Kernel Kernel::from_function(const std::function<double(double, double)>& fn, int d, double h, Index radius,
                             std::optional<double> tail_bound, std::string label) {
  if (d != 1 && d != 2) throw InvalidArgument("kernels support d = 1 or d = 2");
  if (!(h > 0) || radius < 0) throw InvalidArgument("kernel sampling needs h > 0 and radius >= 0");
  const Index w = 2 * radius + 1;
  Eigen::VectorXd s(d == 1 ? w : w * w);
  if (d == 1) {
    for (Index m = -radius; m <= radius; ++m) s[m + radius] = fn(static_cast<double>(m) * h, 0.0);
  } else {
    for (Index a = -radius; a <= radius; ++a)
      for (Index b = -radius; b <= radius; ++b)
        s[(a + radius) * w + (b + radius)] = fn(static_cast<double>(a) * h, static_cast<double>(b) * h);
  }
  return from_samples(std::move(s), d, h, radius, tail_bound, std::move(label));
}

Kernel Kernel::from_samples(Eigen::VectorXd samples, int d, double h, Index radius, std::optional<double> tail_bound,
                            std::string label) {
  const Index w = 2 * radius + 1;
  if (samples.size() != (d == 1 ? w : w * w)) throw DimensionMismatch("kernel sample count does not match radius");
  if (!samples.allFinite()) throw InvalidArgument("kernel samples must be finite");
  if (tail_bound && *tail_bound < 0) throw InvalidArgument("kernel tail bound must be nonnegative");
  Kernel k;
  k.dim_ = d;
  k.step_ = h;
  k.radius_ = radius;
  k.samples_ = std::move(samples);
  k.tail_bound_ = tail_bound;
  k.label_ = std::move(label);
  return k;
}

Kernel Kernel::dirac(int d, double h) {
  Eigen::VectorXd s(1);
  s[0] = d == 1 ? 1.0 / h : 1.0 / (h * h);
  return from_samples(std::move(s), d, h, 0, 0.0, "dirac");
}

Kernel Kernel::reflected() const {
  Kernel k = *this;
  k.samples_ = samples_.reverse();
  k.label_ = "reflect(" + label_ + ")";
  if (form_) {
    if (form_->radial()) {
      k.label_ = label_;
    } else if (form_->type == KernelType::Indicator) {
      k.form_ = ClosedForm::indicator(-form_->p2, -form_->p1).scaled(form_->scale);
    } else {
      k.form_.reset();
      k.tail_bound_ = form_->tail_mass((static_cast<double>(radius_) + 0.5) * step_, dim_);
    }
  }
  return k;
}

Kernel Kernel::squared() const {
  Kernel k = *this;
  k.samples_ = samples_.array().square().matrix();
  k.form_.reset();
  const double edge = (static_cast<double>(radius_) + 0.5) * step_;
  if (form_) {
    // |k|^2 <= sup|k| * |k| on the tail; the sup is bounded by the majorant value at the edge.
    const double sup_tail = form_->majorant_tail(edge, dim_) > 0
                                ? std::max(std::abs(form_->eval(edge)), std::abs(form_->eval(-edge)))
                                : 0.0;
    double sup_beyond = sup_tail;
    if (form_->type == KernelType::Indicator || form_->type == KernelType::ExpSum) sup_beyond = samples_.cwiseAbs().maxCoeff();
    k.tail_bound_ = sup_beyond * form_->tail_mass(edge, dim_);
  } else if (tail_bound_ && *tail_bound_ == 0.0) {
    k.tail_bound_ = 0.0;
  } else {
    k.tail_bound_.reset();
  }
  k.label_ = "sq(" + label_ + ")";
  return k;
}

Kernel Kernel::scaled(double c) const {
  Kernel k = *this;
  k.samples_ *= c;
  if (form_) k.form_ = form_->scaled(c);
  if (tail_bound_) k.tail_bound_ = *tail_bound_ * std::abs(c);
  if (form_) k.label_ = k.form_->to_string();
  else k.label_ = std::to_string(c) + "*" + label_;
  return k;
}

Kernel Kernel::resampled(double h, Index radius) const {
  if (!form_) throw InvalidArgument("only closed-form kernels can be resampled");
  return sample(*form_, dim_, h, radius);
}

}  // namespace rlab
