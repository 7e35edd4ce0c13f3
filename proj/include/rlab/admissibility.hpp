#pragma once

#include <optional>
#include <string>

#include "rlab/kernel.hpp"

namespace rlab {

enum class Criterion { RadialMajorant, Gradient, ClassSSquared };

std::string to_string(Criterion c);

struct AdmissibilityCertificate {
  Criterion criterion = Criterion::RadialMajorant;
  double bound_value = 0.0;
  bool passed = false;
  double tolerance = 1e-6;
};

/// Volume of the Euclidean unit ball in R^d (2 for d = 1, pi for d = 2).
double unit_ball_volume(int d);

/// h^d sum |k(mh)| plus the mass outside the sampled box (analytic for closed
/// forms, the stated tail bound otherwise).
double l1_norm(const Kernel& k);
/// Exact integral of |k| when a closed form is attached.
std::optional<double> l1_norm_analytic(const Kernel& k);

/// Integral of the radial majorant r -> sup_{|y| >= r} |k(y)|: a suffix max over
/// samples sorted by radius, summed with weight h^d, plus a tail term.
/// Throws DomainTooSmall when a kernel without tail information is nonzero on
/// the boundary of its box.
double radial_majorant_integral(const Kernel& k);

/// |B^d| * int_0^inf rho^d sup_{|xi|=1} |grad k(rho xi)| drho. This dominates
/// radial_majorant_integral with constant one. Throws NonDecayingKernel when a
/// sampled kernel does not vanish at the edge of its box.
double gradient_criterion(const Kernel& k);

struct ClassSResult {
  double s_value = 0.0;        // int_0^inf sqrt(t) |k'(t)| dt
  double squared_bound = 0.0;  // int_0^inf t |(k^2)'(t)| dt
  bool chain_holds = true;     // squared_bound <= 2 s_value^2 within the tolerance
  bool in_class = true;        // s_value <= 1
};

/// For kernels supported on [0, inf). Throws InvalidArgument for support on the
/// negative axis and NonDecayingKernel when k does not tend to zero.
ClassSResult class_S_check(const Kernel& k, double chain_tolerance = 1e-6);

/// Runs one criterion. Gradient certificates fail (rather than throw) on
/// kernels that cannot be differentiated.
AdmissibilityCertificate certify(const Kernel& k, Criterion c, double tol = 1e-6);

}  // namespace rlab
