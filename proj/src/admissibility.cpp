#include "rlab/admissibility.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "rlab/defaults.hpp"
#include "rlab/errors.hpp"
#include "rlab/quadrature.hpp"

namespace rlab {

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::RadialMajorant: return "radial-majorant";
    case Criterion::Gradient: return "gradient";
    case Criterion::ClassSSquared: return "class-S-squared";
  }
  return "unknown";
}

double unit_ball_volume(int d) {
  if (d == 1) return 2.0;
  if (d == 2) return std::numbers::pi;
  throw InvalidArgument("unit ball volume only for d = 1, 2");
}

namespace {

double edge_radius(const Kernel& k) { return (static_cast<double>(k.radius()) + 0.5) * k.step(); }

double cell_volume(const Kernel& k) { return k.dim() == 1 ? k.step() : k.step() * k.step(); }

/// Largest |k| on the outermost ring of samples.
double boundary_max(const Kernel& k) {
  const Index r = k.radius();
  double m = 0.0;
  if (k.dim() == 1) return std::max(std::abs(k.at(-r)), std::abs(k.at(r)));
  for (Index a = -r; a <= r; ++a) {
    m = std::max({m, std::abs(k.at(a, -r)), std::abs(k.at(a, r)), std::abs(k.at(-r, a)), std::abs(k.at(r, a))});
  }
  return m;
}

Index squared_radius(const Kernel& k, Index flat) {
  if (k.dim() == 1) {
    const Index m = flat - k.radius();
    return m * m;
  }
  const Index a = flat / k.width() - k.radius(), b = flat % k.width() - k.radius();
  return a * a + b * b;
}

}  // namespace

double l1_norm(const Kernel& k) {
  double riemann = cell_volume(k) * k.samples().cwiseAbs().sum();
  if (k.closed_form()) return riemann + k.closed_form()->tail_mass(edge_radius(k), k.dim());
  return riemann + k.tail_bound().value_or(0.0);
}

std::optional<double> l1_norm_analytic(const Kernel& k) {
  if (!k.closed_form()) return std::nullopt;
  return k.closed_form()->l1(k.dim());
}

double radial_majorant_integral(const Kernel& k) {
  const Index n = k.samples().size();
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::vector<Index> r2(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) r2[static_cast<size_t>(i)] = squared_radius(k, i);
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return r2[static_cast<size_t>(a)] > r2[static_cast<size_t>(b)]; });

  // Suffix max over radii, taking each group of equal radius as a whole.
  double running = 0.0, total = 0.0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    const Index r = r2[static_cast<size_t>(order[i])];
    while (j < order.size() && r2[static_cast<size_t>(order[j])] == r) {
      running = std::max(running, std::abs(k.samples()[order[j]]));
      ++j;
    }
    total += running * static_cast<double>(j - i);
    i = j;
  }
  double tail = 0.0;
  if (k.closed_form()) {
    tail = k.closed_form()->majorant_tail(edge_radius(k), k.dim());
  } else if (k.tail_bound()) {
    tail = *k.tail_bound();
  } else if (boundary_max(k) > 0.0) {
    throw DomainTooSmall("kernel '" + k.label() +
                         "' is nonzero on the boundary of its box and has no stated tail bound");
  }
  return cell_volume(k) * total + tail;
}

double gradient_criterion(const Kernel& k) {
  const double ball = unit_ball_volume(k.dim());
  const auto& form = k.closed_form();
  if (form && form->differentiable()) {
    const int d = k.dim();
    auto integrand = [&](double rho) {
      double g = 0.0;
      if (d == 1) g = std::max(std::abs(form->derivative(rho)), std::abs(form->derivative(-rho)));
      else g = std::abs(form->derivative(rho, 2));
      return std::pow(rho, d) * g;
    };
    return ball * integrate_half_line(integrand, form->breakpoints(), 1e-12);
  }

  const double peak = k.samples().cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0.0;
  if (boundary_max(k) > defaults().tail_tolerance * peak)
    throw NonDecayingKernel("kernel '" + k.label() + "' does not vanish at the edge of its box");

  const double h = k.step();
  const Index r = k.radius();
  auto diff = [&](Index a, Index b, int axis) {
    // Central differences in the interior, one-sided on the box edge.
    const Index lo = -r, hi = r;
    const Index pos = axis == 0 ? a : b;
    auto val = [&](Index s) { return axis == 0 ? k.at(s, b) : k.at(a, s); };
    if (pos == lo) return (val(pos + 1) - val(pos)) / h;
    if (pos == hi) return (val(pos) - val(pos - 1)) / h;
    return (val(pos + 1) - val(pos - 1)) / (2.0 * h);
  };
  if (k.dim() == 1) {
    double total = 0.0;
    for (Index m = 1; m <= r; ++m) {
      const double g = std::max(std::abs(diff(m, 0, 0)), std::abs(diff(-m, 0, 0)));
      total += static_cast<double>(m) * h * g * h;
    }
    return ball * total;
  }
  // Two dimensions: sup of |grad k| over shells of width h.
  std::vector<double> shell(static_cast<size_t>(2 * r + 2), 0.0);
  for (Index a = -r; a <= r; ++a) {
    for (Index b = -r; b <= r; ++b) {
      const double gx = diff(a, b, 0), gy = diff(a, b, 1);
      const auto s = static_cast<size_t>(std::llround(std::sqrt(static_cast<double>(a * a + b * b))));
      shell[s] = std::max(shell[s], std::hypot(gx, gy));
    }
  }
  double total = 0.0;
  for (size_t s = 1; s < shell.size(); ++s) total += std::pow(static_cast<double>(s) * h, 2) * shell[s] * h;
  return ball * total;
}

ClassSResult class_S_check(const Kernel& k, double chain_tolerance) {
  if (k.dim() != 1) throw InvalidArgument("class S check is one-dimensional");
  ClassSResult res;
  const auto& form = k.closed_form();
  if (form) {
    if (!form->one_sided()) throw InvalidArgument("kernel '" + k.label() + "' has support on the negative axis");
  } else {
    for (Index m = -k.radius(); m < 0; ++m)
      if (k.at(m) != 0.0) throw InvalidArgument("kernel '" + k.label() + "' has support on the negative axis");
  }
  if (k.samples().cwiseAbs().maxCoeff() == 0.0) return res;

  if (form && form->differentiable()) {
    // Substituting t = u^2 removes the square-root singularity at the origin.
    auto s_integrand = [&](double u) { return 2.0 * u * u * std::abs(form->derivative(u * u)); };
    auto sq_integrand = [&](double u) {
      const double t = u * u;
      return 4.0 * u * u * u * std::abs(form->eval(t) * form->derivative(t));
    };
    std::vector<double> breaks;
    for (double b : form->breakpoints()) breaks.push_back(std::sqrt(b));
    res.s_value = integrate_half_line(s_integrand, breaks, 1e-13);
    res.squared_bound = integrate_half_line(sq_integrand, breaks, 1e-13);
  } else {
    const double h = k.step();
    const Index r = k.radius();
    const double peak = k.samples().cwiseAbs().maxCoeff();
    if (std::abs(k.at(r)) > defaults().tail_tolerance * peak && !(k.tail_bound() && *k.tail_bound() == 0.0))
      throw NonDecayingKernel("kernel '" + k.label() + "' does not tend to zero");
    // Midpoint sums over the cells (mh, (m+1)h): the difference quotient is exact
    // for the piecewise-linear interpolant of the samples.
    for (Index m = 0; m < r; ++m) {
      const double a = k.at(m), b = k.at(m + 1);
      const double t = (static_cast<double>(m) + 0.5) * h;
      const double dk = (b - a) / h;
      res.s_value += std::sqrt(t) * std::abs(dk) * h;
      res.squared_bound += 2.0 * t * std::abs(0.5 * (a + b) * dk) * h;
    }
  }
  res.chain_holds = res.squared_bound <= 2.0 * res.s_value * res.s_value * (1.0 + chain_tolerance) + 1e-300;
  res.in_class = res.s_value <= 1.0 + 1e-12;
  return res;
}

AdmissibilityCertificate certify(const Kernel& k, Criterion c, double tol) {
  AdmissibilityCertificate cert;
  cert.criterion = c;
  cert.tolerance = tol;
  switch (c) {
    case Criterion::RadialMajorant: cert.bound_value = radial_majorant_integral(k); break;
    case Criterion::Gradient: cert.bound_value = gradient_criterion(k); break;
    case Criterion::ClassSSquared: cert.bound_value = class_S_check(k).s_value; break;
  }
  cert.passed = cert.bound_value <= 1.0 + tol;
  return cert;
}

}  // namespace rlab
