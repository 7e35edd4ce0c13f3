#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rlab {

using Eigen::Index;

enum class KernelType {
  Exponential,          // (lambda/2) exp(-lambda |t|); in d = 2 normalised to mass one
  Gaussian,             // centred normal density with deviation sigma
  Poisson,              // a / (pi (a^2 + t^2)); in d = 2 the matching Poisson kernel
  Indicator,            // 1 on (a, b), 1/2 at the endpoints, d = 1
  Power,                // c max(|t|, eps)^(-alpha), c chosen for mass one, d = 1
  OneSidedExponential,  // exp(-lambda t) for t > 0, 1/2 at t = 0, d = 1
  ExpSum,               // sum_i c_i exp(-a_i t) for t > 0, d = 1
};

/// Analytic description of a kernel, multiplied by `scale`.
struct ClosedForm {
  KernelType type = KernelType::Exponential;
  double p1 = 1.0;  // lambda, sigma, a, a, alpha, lambda
  double p2 = 0.0;  // -, -, -, b, eps, -
  std::vector<double> coeffs, rates;  // ExpSum only
  double scale = 1.0;

  static ClosedForm exponential(double lambda);
  static ClosedForm gaussian(double sigma);
  static ClosedForm poisson(double a);
  static ClosedForm indicator(double a, double b);
  static ClosedForm power(double alpha, double eps);
  static ClosedForm one_sided_exponential(double lambda);
  static ClosedForm exp_sum(std::vector<double> coeffs, std::vector<double> rates);
  /// "exp:2", "gauss:1", "poisson:0.5", "ind:0:1", "power:1.5:0.1", "oexp:1",
  /// optionally prefixed by a scale factor as in "2*exp:1".
  static ClosedForm parse(std::string_view text);

  ClosedForm scaled(double c) const;
  std::string to_string() const;

  bool supports_dim(int d) const;
  bool radial() const;        // depends on |x| only
  bool one_sided() const;     // vanishes for t < 0
  bool differentiable() const;

  double eval(double t) const;                 // d = 1
  double eval(double x, double y) const;       // d = 2
  /// k'(t) for d = 1 (t != 0), or the radial derivative for d = 2.
  double derivative(double t, int d = 1) const;
  /// Analytic integral of |k| over R^d.
  double l1(int d) const;
  /// Integral of |k| over |x| > r.
  double tail_mass(double r, int d) const;
  /// Integral over |x| > r of sup_{|y| >= |x|} |k(y)|, or an upper bound for it.
  double majorant_tail(double r, int d) const;
  /// Points in (0, inf) where k or k' is not smooth.
  std::vector<double> breakpoints() const;
};

/// Kernel sampled at the offsets m*h, |m_i| <= radius, of a uniform grid.
class Kernel {
 public:
  Kernel() = default;

  static Kernel sample(const ClosedForm& form, int d, double h, Index radius);
  /// Samples an arbitrary function; `tail_bound` states the mass outside the box.
  static Kernel from_function(const std::function<double(double, double)>& fn, int d, double h, Index radius,
                              std::optional<double> tail_bound, std::string label = "sampled");
  static Kernel from_samples(Eigen::VectorXd samples, int d, double h, Index radius,
                             std::optional<double> tail_bound, std::string label = "sampled");
  /// The grid identity: a single sample of value 1/h^d at the origin.
  static Kernel dirac(int d, double h);

  int dim() const { return dim_; }
  double step() const { return step_; }
  Index radius() const { return radius_; }
  Index width() const { return 2 * radius_ + 1; }
  const Eigen::VectorXd& samples() const { return samples_; }
  const std::optional<ClosedForm>& closed_form() const { return form_; }
  const std::optional<double>& tail_bound() const { return tail_bound_; }
  const std::string& label() const { return label_; }

  /// Value at offset (m0, m1) * h; zero outside the sampled box.
  double at(Index m0, Index m1 = 0) const {
    if (m0 < -radius_ || m0 > radius_ || m1 < -radius_ || m1 > radius_) return 0.0;
    return dim_ == 1 ? samples_[m0 + radius_] : samples_[(m0 + radius_) * width() + (m1 + radius_)];
  }

  /// k(-x); the closed form is kept when the kernel is symmetric.
  Kernel reflected() const;
  /// Pointwise square of the samples.
  Kernel squared() const;
  Kernel scaled(double c) const;
  /// Resamples the closed form at a new step and radius.
  Kernel resampled(double h, Index radius) const;

 private:
  int dim_ = 1;
  double step_ = 1.0;
  Index radius_ = 0;
  Eigen::VectorXd samples_ = Eigen::VectorXd::Zero(1);
  std::optional<ClosedForm> form_;
  std::optional<double> tail_bound_;
  std::string label_ = "zero";
};

}  // namespace rlab
