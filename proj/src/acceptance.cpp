#include "rlab/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "rlab/admissibility.hpp"
#include "rlab/defaults.hpp"
#include "rlab/errors.hpp"
#include "rlab/family.hpp"
#include "rlab/maximal.hpp"
#include "rlab/randsum.hpp"
#include "rlab/rbound.hpp"
#include "rlab/rng.hpp"
#include "rlab/stochconv.hpp"

namespace rlab {

using json = nlohmann::ordered_json;

const std::map<std::string, double>& acceptance_tolerances() {
  static const std::map<std::string, double> t = {
      {"counterexample.slack", 10.0},   // multiples of h below the lower bound
      {"kernels.l1", 1e-6},
      {"kernels.hole", 1e-6},
      {"class_s.chain", 1e-6},          // relative
      {"class_s.value", 1e-6},
      {"pointwise.C", 4.0},
      {"pointwise.shrink", 1.5},
      {"nk.young_slack", 5.0},          // multiples of h
      {"nk.lower_slack", 10.0},         // multiples of h
      {"identity.tol", 1e-9},
      {"equivalence.low", 0.25},
      {"equivalence.high", 4.0},
      {"ito.sigmas", 3.0},
      {"duality.tol", 1e-6},
      {"l1failure.growth", 2.0},
      {"sums.sigmas", 3.0},
      {"sums.constant_scale", 1.0},     // multiplies the recorded comparison constants
  };
  return t;
}

const std::vector<std::string>& criterion_names() {
  static const std::vector<std::string> n = {
      "counterexample",  "kernel-certificates", "class-s",  "pointwise-bound", "nk-two-sided", "identity",
      "equivalence-band", "ito-isometry",       "duality",  "l1-failure",      "sum-norms",    "determinism"};
  return n;
}

int criterion_id(std::string_view key) {
  const auto& names = criterion_names();
  for (size_t i = 0; i < names.size(); ++i)
    if (key == names[i] || key == std::to_string(i + 1)) return static_cast<int>(i) + 1;
  return 0;
}

void validate(const AcceptanceOptions& opt) {
  for (int id : opt.only)
    if (id < 1 || id > static_cast<int>(criterion_names().size()))
      throw ConfigError("only", "unknown criterion " + std::to_string(id));
  for (const auto& [k, v] : opt.tolerances) {
    if (!acceptance_tolerances().contains(k)) throw ConfigError("tolerance." + k, "unknown tolerance key");
    if (!std::isfinite(v)) throw ConfigError("tolerance." + k, "value must be finite");
  }
}

namespace {

struct Context {
  std::uint64_t seed;
  std::map<std::string, double> tol;
  double operator[](const std::string& key) const { return tol.at(key); }
  Rng rng(std::uint64_t stream) const { return Rng(derive_seed(seed, 1000 + stream)); }
};

struct Outcome {
  bool passed = true;
  json detail = json::object();
};

/// Piecewise constant on `pieces` equal blocks; each block is zero with probability `zero_prob`.
CellMatrix random_blocks(Rng& rng, Index pieces, Index dim, double zero_prob) {
  CellMatrix v(pieces, dim);
  for (Index b = 0; b < pieces; ++b) {
    const bool zero = rng.uniform() < zero_prob;
    for (Index j = 0; j < dim; ++j) v(b, j) = zero ? 0.0 : rng.normal();
  }
  return v;
}

GridFunction expand_blocks(const Grid& g, const LatticeSpec& spec, const CellMatrix& blocks) {
  const Index pieces = blocks.rows(), per = g.cells() / pieces;
  if (per * pieces != g.cells()) throw InvalidArgument("grid does not split into the requested blocks");
  CellMatrix v(g.cells(), blocks.cols());
  for (Index i = 0; i < g.cells(); ++i) v.row(i) = blocks.row(i / per);
  return GridFunction(g, spec, std::move(v));
}

ClosedForm random_symmetric_form(Rng& rng) {
  switch (rng.below(4)) {
    case 0: return ClosedForm::exponential(rng.uniform(0.5, 8.0));
    case 1: return ClosedForm::gaussian(rng.uniform(0.05, 1.0));
    case 2: return ClosedForm::poisson(rng.uniform(0.05, 1.0));
    default: {
      const double w = rng.uniform(0.1, 1.0);
      return ClosedForm::indicator(-w, w);
    }
  }
}

Kernel sample_on(const ClosedForm& form, const Grid& g) { return Kernel::sample(form, 1, g.step, g.cells()); }

// 1 -------------------------------------------------------------------------
Outcome counterexample(const Context& c) {
  Outcome o;
  json rows = json::array();
  for (int n = 2; n <= 10; ++n) {
    const auto inst = build_counterexample(n, true);
    const double h = inst.grid.step;
    const auto ev = evaluate_counterexample(inst, RadiusSet::dyadic(h, 2.0));
    const bool ratio_ok = ev.ratio >= ev.lower_bound - c["counterexample.slack"] * h;
    const bool point_ok = ev.window_min_sq >= n / 16.0;
    o.passed &= ratio_ok && point_ok;
    rows.push_back({{"N", n},
                    {"h", h},
                    {"f_norm", ev.f_norm},
                    {"ratio", ev.ratio},
                    {"lower_bound", ev.lower_bound},
                    {"min_pointwise_sq", ev.window_min_sq},
                    {"N_over_16", n / 16.0},
                    {"passed", ratio_ok && point_ok}});
  }
  o.detail["rows"] = rows;
  return o;
}

// 2 -------------------------------------------------------------------------
Outcome kernel_certificates(const Context& c) {
  Outcome o;
  const double h = 1.0 / 1024.0;
  const Index radius = 8192;
  const double tol = c["kernels.l1"];
  json zoo = json::array();
  for (const char* s : {"exp:2", "gauss:0.5", "poisson:0.5", "ind:-0.5:0.5", "power:1.5:0.1"}) {
    const Kernel k = Kernel::sample(ClosedForm::parse(s), 1, h, radius);
    const auto cert = certify(k, Criterion::RadialMajorant, tol);
    const double l1 = l1_norm(k);
    const bool ok = cert.passed && l1 <= 1.0 + tol;
    o.passed &= ok;
    zoo.push_back({{"kernel", s}, {"radial_majorant", cert.bound_value}, {"l1", l1}, {"passed", ok}});
  }
  o.detail["zoo"] = zoo;

  Rng rng = c.rng(2);
  Index certified = 0, violations = 0;
  double worst = 0.0;
  for (int i = 0; i < 40; ++i) {
    ClosedForm f = rng.below(5) == 4 ? ClosedForm::power(rng.uniform(1.2, 3.0), rng.uniform(0.05, 0.5))
                                     : random_symmetric_form(rng);
    if (rng.below(3) == 0) {
      // Shifted indicators are not radially decreasing about the origin.
      const double a = rng.uniform(-1.0, 0.0);
      f = ClosedForm::indicator(a, a + rng.uniform(0.1, 2.0));
    }
    const Kernel k = Kernel::sample(f.scaled(rng.uniform(0.4, 1.4)), 1, h, radius);
    if (!certify(k, Criterion::RadialMajorant, tol).passed) continue;
    ++certified;
    const double l1 = l1_norm(k);
    worst = std::max(worst, l1);
    if (l1 > 1.0 + tol) ++violations;
  }
  o.passed &= violations == 0 && certified > 0;
  o.detail["random"] = {{"kernels", 40}, {"certified", certified}, {"max_l1_certified", worst},
                        {"violations", violations}};

  // Half of 1_{(1,2)}(|t|); samples at the jumps carry half the jump.
  const Index one = 1024, hr = 2 * one + 8;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(2 * hr + 1);
  for (Index m = -hr; m <= hr; ++m) {
    const Index a = std::abs(m);
    s[m + hr] = (a > one && a < 2 * one) ? 0.5 : (a == one || a == 2 * one) ? 0.25 : 0.0;
  }
  const Kernel hole = Kernel::from_samples(s, 1, h, hr, 0.0, "hole");
  const auto cert = certify(hole, Criterion::RadialMajorant, tol);
  const bool hole_ok = !cert.passed && std::abs(cert.bound_value - 2.0) <= c["kernels.hole"];
  o.passed &= hole_ok;
  o.detail["hole"] = {{"radial_majorant", cert.bound_value}, {"l1", l1_norm(hole)}, {"passed", hole_ok}};
  return o;
}

// 3 -------------------------------------------------------------------------
Outcome class_s(const Context& c) {
  Outcome o;
  Rng rng = c.rng(3);
  json rows = json::array();
  const double rel = c["class_s.chain"];
  for (int i = 0; i < 10; ++i) {
    const int terms = 1 + static_cast<int>(rng.below(3));
    std::vector<double> coeffs, rates;
    for (int t = 0; t < terms; ++t) {
      coeffs.push_back(rng.uniform(-1.0, 1.0));
      rates.push_back(rng.uniform(0.3, 5.0));
    }
    const ClosedForm f = ClosedForm::exp_sum(coeffs, rates);
    const Kernel k = Kernel::sample(f, 1, 1.0 / 64.0, 4096);
    const auto r = class_S_check(k, rel);
    const bool ok = r.squared_bound <= 2.0 * r.s_value * r.s_value * (1.0 + rel);
    o.passed &= ok;
    rows.push_back({{"kernel", f.to_string()},
                    {"s_value", r.s_value},
                    {"squared_bound", r.squared_bound},
                    {"two_s_squared", 2.0 * r.s_value * r.s_value},
                    {"in_class", r.in_class},
                    {"passed", ok}});
  }
  o.detail["random"] = rows;
  const Kernel e = Kernel::sample(ClosedForm::one_sided_exponential(1.0), 1, 1.0 / 64.0, 4096);
  const auto r = class_S_check(e, rel);
  const double expected = std::sqrt(std::numbers::pi) / 2.0;
  const bool ok = std::abs(r.s_value - expected) <= c["class_s.value"] && r.in_class;
  o.passed &= ok;
  o.detail["exp"] = {{"s_value", r.s_value}, {"expected", expected}, {"squared_bound", r.squared_bound},
                     {"passed", ok}};
  return o;
}

// 4 -------------------------------------------------------------------------
Outcome pointwise_bound(const Context& c) {
  Outcome o;
  const std::vector<std::string> zoo = {"exp:2", "gauss:0.5", "poisson:0.5", "ind:-0.5:0.5", "power:1.5:0.1"};
  const std::array<double, 2> steps = {1.0 / 256.0, 1.0 / 512.0};
  constexpr Index kFunctions = 100, kPieces = 16;

  Rng rng = c.rng(4);
  std::vector<CellMatrix> blocks;
  for (Index i = 0; i < kFunctions; ++i) blocks.push_back(random_blocks(rng, kPieces, 1, 0.3));

  // Certificates belong to the kernel, so they are issued on a fine reference grid.
  std::vector<bool> certified;
  for (const auto& z : zoo)
    certified.push_back(
        certify(Kernel::sample(ClosedForm::parse(z), 1, 1.0 / 1024.0, 8192), Criterion::RadialMajorant).passed);
  std::vector<std::array<double, 2>> violation(zoo.size(), {0.0, 0.0});
  std::vector<double> margin(zoo.size(), -1e300);
  for (size_t r = 0; r < steps.size(); ++r) {
    const Grid g = Grid::line(-1.0, 1.0, steps[r]);
    const RadiusSet J = RadiusSet::dense(g.step, 2.0);
    std::vector<Kernel> ks;
    for (size_t z = 0; z < zoo.size(); ++z) ks.push_back(sample_on(ClosedForm::parse(zoo[z]), g));
    for (const auto& b : blocks) {
      const GridFunction f = expand_blocks(g, LatticeSpec::scalar(), b);
      const GridFunction af(g, f.spec(), f.values().cwiseAbs());
      const Eigen::VectorXd mf = maximal(af, J).values().col(0);
      for (size_t z = 0; z < zoo.size(); ++z) {
        if (!certified[z]) continue;
        const Eigen::VectorXd kf = convolve(ks[z], f).values().col(0).cwiseAbs();
        const double gap = (kf - mf).maxCoeff();
        violation[z][r] = std::max(violation[z][r], gap);
        margin[z] = std::max(margin[z], gap);
      }
    }
  }
  json rows = json::array();
  for (size_t z = 0; z < zoo.size(); ++z) {
    const double v0 = violation[z][0], v1 = violation[z][1];
    const bool bound_ok = v0 <= c["pointwise.C"] * steps[0] && v1 <= c["pointwise.C"] * steps[1];
    const bool vacuous = v0 < 1e-12;
    const bool shrink_ok = vacuous || v1 <= v0 / c["pointwise.shrink"];
    const bool ok = certified[z] && bound_ok && shrink_ok;
    o.passed &= ok;
    rows.push_back({{"kernel", zoo[z]},
                    {"certified", static_cast<bool>(certified[z])},
                    {"violation_h", v0},
                    {"violation_h_half", v1},
                    {"over_h", v0 / steps[0]},
                    {"shrink", v1 > 0 ? v0 / v1 : 0.0},
                    {"max_gap", margin[z]},
                    {"vacuous", vacuous},
                    {"passed", ok}});
  }
  o.detail["functions"] = kFunctions;
  o.detail["kernels"] = rows;
  return o;
}

// 5 -------------------------------------------------------------------------
Outcome nk_two_sided(const Context& c) {
  Outcome o;
  Rng rng = c.rng(5);
  const Grid g = Grid::line(-1.0, 1.0, 1.0 / 128.0);
  const std::array<double, 6> ps = {2.0, 2.5, 3.0, 4.0, 6.0, 8.0};
  double worst = -1e300;
  Index young_fail = 0;
  for (int i = 0; i < 50; ++i) {
    const Kernel k = sample_on(random_symmetric_form(rng), g);
    const GridFunction G = expand_blocks(g, LatticeSpec::scalar(), random_blocks(rng, 16, 1, 0.3));
    const Exponent p(ps[rng.below(6)]);
    const double lhs = apply_Nk(k, G, p).norm;
    const double k2 = std::sqrt(k.samples().squaredNorm() * g.step);
    const double gap = lhs - (k2 * lp_norm(G, p) + c["nk.young_slack"] * g.step);
    worst = std::max(worst, gap);
    if (gap > 0) ++young_fail;
  }
  o.passed &= young_fail == 0;
  o.detail["young"] = {{"triples", 50}, {"max_excess", worst}, {"failures", young_fail}};

  const Grid lg = Grid::line(-0.5, 1.5, 1.0 / 1024.0);
  const Kernel ind = sample_on(ClosedForm::indicator(0.0, 1.0), lg);
  const double delta = 1.0;
  json rows = json::array();
  for (int e = 3; e <= 7; ++e) {
    const double r = std::exp2(-e);
    const GridFunction G = GridFunction::from_function(
        lg, LatticeSpec::scalar(), [&](const double* x, double* out) { out[0] = (x[0] > 0 && x[0] < r) ? 1.0 : 0.0; });
    for (double pv : {2.0, 4.0, 8.0}) {
      const Exponent p(pv);
      const double ratio = apply_Nk(ind, G, p).norm / lp_norm(G, p);
      const double power = std::pow(r, 0.5 - 1.0 / pv);
      const double slack = c["nk.lower_slack"] * lg.step;
      const double bound = power * std::pow(delta / 2.0, 1.0 / pv) - slack;
      const double literal = power * (delta / 2.0) - slack;
      const bool ok = ratio >= bound && ratio >= literal;
      o.passed &= ok;
      rows.push_back({{"r", r}, {"p", pv}, {"ratio", ratio}, {"bound", bound}, {"literal_bound", literal},
                      {"passed", ok}});
    }
  }
  o.detail["indicator"] = rows;
  return o;
}

// 6 -------------------------------------------------------------------------
Outcome identity(const Context& c) {
  Outcome o;
  Rng rng = c.rng(6);
  const Grid g = Grid::line(-2.0, 2.0, 1.0 / 32.0);
  json rows = json::array();
  for (const char* s : {"l2(3,l4(4))", "l4(6)"}) {
    const LatticeSpec spec = LatticeSpec::parse(s);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Index n = 1 + rng.below(4);
      std::vector<Kernel> ks;
      std::vector<GridFunction> G;
      for (Index j = 0; j < n; ++j) {
        ks.push_back(sample_on(random_symmetric_form(rng), g));
        G.push_back(expand_blocks(g, spec, random_blocks(rng, 8, spec.total_dim(), 0.2)));
      }
      worst = std::max(worst, concavification_identity_deviation(ks, G));
    }
    const bool ok = worst <= c["identity.tol"];
    o.passed &= ok;
    rows.push_back({{"X", s}, {"suites", 20}, {"max_deviation", worst}, {"passed", ok}});
  }
  o.detail["specs"] = rows;
  return o;
}

// 7 -------------------------------------------------------------------------
Outcome equivalence_band(const Context& c) {
  Outcome o;
  const Grid g = Grid::line(-2.0, 2.0, 1.0 / 32.0);
  std::vector<Kernel> ks;
  for (double lam : {1.0, 2.0, 4.0, 8.0}) ks.push_back(sample_on(ClosedForm::exponential(lam), g));
  SearchOptions opt;
  opt.budget = 1200;
  opt.restarts = 3;
  opt.seed = derive_seed(c.seed, 7);
  json rows = json::array();
  for (const char* s : {"l4(8)", "l2(4,l4(4))"}) {
    const SpaceSpec space{Exponent(4.0), LatticeSpec::parse(s), g};
    const auto rep = equivalence_experiment(ks, space, opt);
    const bool ok = rep.ratio >= c["equivalence.low"] && rep.ratio <= c["equivalence.high"];
    o.passed &= ok;
    rows.push_back({{"X", s},
                    {"A", rep.A},
                    {"B", rep.B},
                    {"sqrt_B", rep.sqrtB},
                    {"ratio", rep.ratio},
                    {"identity_deviation", rep.identity_deviation},
                    {"passed", ok}});
  }
  o.detail["band"] = {c["equivalence.low"], c["equivalence.high"]};
  o.detail["spaces"] = rows;
  return o;
}

// 8 -------------------------------------------------------------------------
Outcome ito_isometry(const Context& c) {
  Outcome o;
  const Grid g = Grid::line(0.0, 2.0, 1.0 / 256.0);
  const Index paths = defaults().paths;
  const double sig = c["ito.sigmas"];
  Rng rng = c.rng(8);
  struct Case {
    const char* kernel;
    const char* spec;
    Index h_dim;
    double t;
    bool unit;  // G = 1 on (0, 1) instead of random blocks
  };
  const std::vector<Case> cases = {
      {"exp:2", "l2(1)", 1, 1.5, true},        {"exp:2", "l2(1)", 1, 0.5, true},
      {"gauss:0.25", "l2(1)", 1, 2.0, false},  {"poisson:0.5", "l2(2)", 1, 1.0, false},
      {"oexp:3", "l2(1)", 1, 1.0, true},       {"ind:0:0.5", "l2(1)", 1, 1.25, false},
      {"exp:1", "l2(2)", 2, 2.0, false},       {"gauss:0.5", "l2(1)", 4, 1.0, false},
      {"4*ind:0:4", "l2(1)", 1, 1.0, true},    {"expsum:1:1:-0.5:3", "l2(2)", 2, 1.5, false},
  };
  json rows = json::array();
  for (size_t i = 0; i < cases.size(); ++i) {
    const Case& cs = cases[i];
    const Kernel k = sample_on(ClosedForm::parse(cs.kernel), g);
    const LatticeSpec spec = LatticeSpec::parse(cs.spec);
    std::vector<GridFunction> G;
    for (Index e = 0; e < cs.h_dim; ++e) {
      if (cs.unit) {
        G.push_back(GridFunction::from_function(g, spec, [&](const double* x, double* out) {
          for (Index j = 0; j < spec.total_dim(); ++j) out[j] = x[0] < 1.0 ? 1.0 : 0.0;
        }));
      } else {
        G.push_back(expand_blocks(g, spec, random_blocks(rng, 16, spec.total_dim(), 0.2)));
      }
    }
    const Index node = static_cast<Index>(std::llround(cs.t / g.step));
    const auto rep = ito_check(k, G, node, paths, derive_seed(c.seed, 80, i));
    json coords = json::array();
    bool ok = true;
    for (const auto& ic : rep.coords) {
      const bool v_ok = std::abs(ic.variance - ic.analytic) <= sig * ic.std_error;
      ok &= v_ok;
      coords.push_back({{"coord", ic.coord},
                        {"variance", ic.variance},
                        {"std_error", ic.std_error},
                        {"analytic", ic.analytic},
                        {"discrete", ic.discrete},
                        {"mean", ic.mean},
                        {"mean_error", ic.mean_error}});
    }
    o.passed &= ok;
    rows.push_back({{"kernel", cs.kernel}, {"X", cs.spec}, {"h_dim", cs.h_dim}, {"t", cs.t}, {"coords", coords},
                    {"passed", ok}});
  }
  o.detail["paths"] = paths;
  o.detail["cases"] = rows;

  // Orthogonal directions of H = R^4 over [0, 1).
  const Index steps = 256;
  auto direction = [&](std::array<double, 4> v) {
    Eigen::MatrixXd f(steps, 4);
    for (Index j = 0; j < steps; ++j)
      for (int e = 0; e < 4; ++e) f(j, e) = v[static_cast<size_t>(e)];
    return f;
  };
  const double r2 = 1.0 / std::sqrt(2.0);
  const std::vector<std::pair<std::array<double, 4>, std::array<double, 4>>> pairs = {
      {{r2, r2, 0, 0}, {r2, -r2, 0, 0}},
      {{0, 0, 1, 0}, {0, 0, 0, 1}},
      {{0.5, 0.5, 0.5, 0.5}, {0.5, -0.5, 0.5, -0.5}},
      {{r2, r2, 0, 0}, {1, 0, 0, 0}},
  };
  json corr = json::array();
  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto cc = wiener_covariance(direction(pairs[i].first), direction(pairs[i].second), g.step, paths,
                                      derive_seed(c.seed, 81, i));
    const bool ok = std::abs(cc.covariance - cc.exact) <= sig * cc.std_error;
    o.passed &= ok;
    corr.push_back({{"covariance", cc.covariance}, {"std_error", cc.std_error}, {"exact", cc.exact},
                    {"correlation", cc.correlation}, {"passed", ok}});
  }
  o.detail["directions"] = corr;
  return o;
}

// 9 -------------------------------------------------------------------------
Outcome duality(const Context& c) {
  Outcome o;
  const Grid g = Grid::line(-1.0, 1.0, 1.0 / 16.0);
  struct Fam {
    std::vector<std::string> kernels;
    double p;
    const char* spec;
  };
  const std::vector<Fam> fams = {
      {{"exp:1", "exp:4"}, 3.0, "l2(2)"},
      {{"gauss:0.25", "poisson:0.5"}, 4.0, "l4(2)"},
      {{"exp:2", "ind:-0.25:0.25", "exp:8"}, 2.0, "l3(2,l2(2))"},
      {{"exp:1", "exp:2", "exp:4"}, 1.5, "l2(3)"},
      {{"power:1.5:0.1", "gauss:0.5"}, 4.0, "l1(2)"},
  };
  SearchOptions opt;
  opt.budget = 600;
  opt.restarts = 3;
  json rows = json::array();
  for (size_t i = 0; i < fams.size(); ++i) {
    const SpaceSpec space{Exponent(fams[i].p), LatticeSpec::parse(fams[i].spec), g};
    const auto fam = OperatorFamily::from_strings(fams[i].kernels, space);
    for (double s : {1.0, 2.0}) {
      opt.seed = derive_seed(c.seed, 90 + i, static_cast<std::uint64_t>(s));
      const auto rep = duality_check(fam, Exponent(s), opt, c["duality.tol"]);
      o.passed &= rep.passed();
      rows.push_back({{"family", fams[i].kernels},
                      {"space", space.to_string()},
                      {"s", s},
                      {"primal", rep.primal_value},
                      {"transported", rep.transported_value},
                      {"dual_estimate", rep.dual_estimate},
                      {"pairing_error", rep.pairing_error},
                      {"dual_norm_error", rep.dual_norm_error},
                      {"non_strict_levels", rep.non_strict_levels},
                      {"passed", rep.passed()}});
    }
  }
  o.detail["checks"] = rows;
  return o;
}

// 10 ------------------------------------------------------------------------
Outcome l1_failure(const Context& c) {
  Outcome o;
  const Grid g = Grid::line(-2.0, 2.0, 1.0 / 2048.0);
  const SpaceSpec stated{Exponent(64.0), LatticeSpec::parse("l1(2,l2(2))"), g};
  std::vector<std::string> names;
  for (int j = 1; j <= 8; ++j) names.push_back("exp:" + std::to_string(1 << j));
  const auto full = OperatorFamily::from_strings(names, stated);
  // The operators act on L^{p/2}; the family is built directly on that space.
  const SpaceSpec space{Exponent(32.0), stated.spec, g};
  const auto fam = OperatorFamily(full.kernels(), space);
  const Exponent s(1.0);
  const Index m_dim = space.spec.total_dim();

  // Dual witness: a bump of width w in the first coordinate of X*, carried to
  // the primal side through the adjoint operators and the norming functional.
  auto transported = [&](const OperatorFamily& f, Index width) {
    const Index centre = g.cells() / 2;
    CellMatrix bump = CellMatrix::Zero(g.cells(), m_dim);
    for (Index i = centre - width / 2; i < centre - width / 2 + width; ++i) bump(i, 0) = 1.0;
    const GridFunction G(g, space.spec.dual(), bump);
    std::vector<GridFunction> H;
    for (Index n = 0; n < f.size(); ++n) H.push_back(convolve(adjoint_kernel(f.op(n)), G));
    const GridFunction J = lp_norming_functional(stack_family(H, s.conjugate()), space.p.conjugate());
    return unstack_family(J, space.spec, f.size());
  };

  SearchOptions opt;
  opt.seed = derive_seed(c.seed, 10);
  opt.ascent_steps = 12;
  json rows = json::array();
  std::vector<double> values;
  std::vector<GridFunction> previous;
  for (Index size = 1; size <= 8; ++size) {
    const OperatorFamily f = fam.prefix(size);
    opt.seeds.clear();
    if (!previous.empty()) {
      auto warm = previous;
      warm.emplace_back(g, space.spec);
      opt.seeds.push_back(std::move(warm));
    }
    opt.seeds.push_back(transported(f, 8));
    opt.restarts = static_cast<Index>(opt.seeds.size());
    opt.budget = opt.restarts * (opt.ascent_steps + 2) * size;
    const auto est = estimate_ls_bound(f, s, opt);
    values.push_back(est.value);
    previous = est.functions();
    rows.push_back({{"size", size}, {"value", est.value}, {"best_restart", est.best_restart},
                    {"method", to_string(est.method)}});
  }
  bool monotone = true;
  for (size_t i = 1; i < values.size(); ++i) monotone &= values[i] > values[i - 1];
  const double growth = values.back() / values.front();
  o.passed = monotone && growth >= c["l1failure.growth"];
  o.detail["space"] = space.to_string();
  o.detail["sizes"] = rows;
  o.detail["strictly_increasing"] = monotone;
  o.detail["growth"] = growth;
  return o;
}

// 11 ------------------------------------------------------------------------
struct SumBand {
  const char* spec;
  double rad_sqf;    // rademacher / square function within [1/K, K]
  double gauss_sqf;
  double gauss_rad;
};

// Recorded comparison constants (reference run at seed 7, 50 suites per spec,
// largest observed two-sided ratio rounded up with a 10% margin).
constexpr std::array<SumBand, 5> kSumBands = {{
    {"l2(4)", 1.11, 1.12, 1.12},
    {"l4(4)", 1.29, 1.28, 1.21},
    {"l1(4)", 1.28, 1.28, 1.20},
    {"l3(2,l2(3))", 1.16, 1.15, 1.14},
    {"l4(3,l1(2))", 1.22, 1.21, 1.21},
}};

Outcome sum_norms(const Context& c) {
  Outcome o;
  Rng rng = c.rng(11);
  const Grid unit = Grid::line(0.0, 1.0, 1.0);
  const double scale = c["sums.constant_scale"], sig = c["sums.sigmas"];
  json rows = json::array();
  for (const auto& band : kSumBands) {
    const LatticeSpec spec = LatticeSpec::parse(band.spec);
    double worst_rs = 1.0, worst_gs = 1.0, worst_gr = 1.0, worst_excess = -1e300;
    for (int i = 0; i < 50; ++i) {
      const Index n = 2 + rng.below(7);
      Eigen::MatrixXd cols(spec.total_dim(), n);
      std::vector<GridFunction> gs;
      for (Index j = 0; j < n; ++j) {
        for (Index r = 0; r < cols.rows(); ++r) cols(r, j) = rng.uniform() < 0.3 ? 0.0 : rng.normal();
        gs.emplace_back(unit, spec, CellMatrix(cols.col(j).transpose()));
      }
      if (cols.squaredNorm() == 0) cols(0, 0) = 1.0, gs[0].values()(0, 0) = 1.0;
      SumOptions sopt;
      sopt.mc_samples = 20000;
      sopt.seed = derive_seed(c.seed, 110, static_cast<std::uint64_t>(i));
      const double rad = rademacher_sum_Lp(spec, cols, Exponent(2.0), sopt).value;
      const SumEstimate gauss = gaussian_sum_Lp(spec, cols, Exponent(2.0), sopt);
      const double sqf = square_function_norm(gs);
      auto two_sided = [](double x) { return std::max(x, 1.0 / x); };
      worst_rs = std::max(worst_rs, two_sided(rad / sqf));
      worst_gs = std::max(worst_gs, two_sided(gauss.value / sqf));
      worst_gr = std::max(worst_gr, two_sided(gauss.value / rad));
      worst_excess = std::max(worst_excess, std::sqrt(2.0 / std::numbers::pi) * rad - sig * gauss.std_error -
                                                gauss.value);
    }
    const bool ok = worst_rs <= band.rad_sqf * scale && worst_gs <= band.gauss_sqf * scale &&
                    worst_gr <= band.gauss_rad * scale && worst_excess <= 0.0;
    o.passed &= ok;
    rows.push_back({{"X", band.spec},
                    {"rademacher_vs_square", worst_rs},
                    {"gaussian_vs_square", worst_gs},
                    {"gaussian_vs_rademacher", worst_gr},
                    {"recorded", {band.rad_sqf, band.gauss_sqf, band.gauss_rad}},
                    {"gaussian_lower_excess", worst_excess},
                    {"passed", ok}});
  }
  o.detail["specs"] = rows;
  return o;
}

// 12 ------------------------------------------------------------------------
/// A cheap slice of every random stream used above.
json determinism_probe(std::uint64_t seed) {
  json out;
  const auto ev = evaluate_counterexample(build_counterexample(4, true), RadiusSet::dyadic(1.0 / 64.0, 2.0));
  out["counterexample"] = ev.ratio;
  Rng rng(derive_seed(seed, 1200));
  const LatticeSpec spec = LatticeSpec::parse("l4(3,l1(2))");
  Eigen::MatrixXd cols(spec.total_dim(), 16);
  for (Index i = 0; i < cols.size(); ++i) cols.data()[i] = rng.normal();
  SumOptions sopt;
  sopt.mc_samples = 5000;
  sopt.seed = derive_seed(seed, 1201);
  out["rademacher_mc"] = rademacher_sum_Lp(spec, cols, Exponent(2.0), sopt).value;
  out["gaussian_mc"] = gaussian_sum_Lp(spec, cols, Exponent(3.0), sopt).value;

  const Grid g = Grid::line(-1.0, 1.0, 1.0 / 16.0);
  const SpaceSpec space{Exponent(3.0), LatticeSpec::parse("l2(2)"), g};
  const std::vector<std::string> names = {"exp:1", "exp:4"};
  SearchOptions opt;
  opt.budget = 200;
  opt.restarts = 2;
  opt.seed = derive_seed(seed, 1202);
  out["ls_bound"] = estimate_ls_bound(OperatorFamily::from_strings(names, space), Exponent(1.0), opt).value;

  const Grid tg = Grid::line(0.0, 1.0, 1.0 / 64.0);
  const std::vector<GridFunction> G = {GridFunction::from_function(
      tg, LatticeSpec::scalar(), [](const double*, double* o) { o[0] = 1.0; })};
  const auto rep = ito_check(Kernel::sample(ClosedForm::exponential(2.0), 1, tg.step, 64), G, 48, 500,
                             derive_seed(seed, 1203));
  out["ito_variance"] = rep.coords[0].variance;
  return out;
}

Outcome determinism(const Context& c) {
  Outcome o;
  const std::string a = determinism_probe(c.seed).dump();
  const std::string b = determinism_probe(c.seed).dump();
  o.passed = a == b;
  o.detail["identical"] = o.passed;
  o.detail["probe_bytes"] = a.size();
  return o;
}

using CriterionFn = Outcome (*)(const Context&);
constexpr std::array<CriterionFn, 12> kCriteria = {counterexample, kernel_certificates, class_s,  pointwise_bound,
                                                   nk_two_sided,   identity,            equivalence_band, ito_isometry,
                                                   duality,        l1_failure,          sum_norms,        determinism};

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                            const std::function<void(const CriterionResult&)>& progress) {
  validate(opt);
  Context ctx{opt.seed, acceptance_tolerances()};
  for (const auto& [k, v] : opt.tolerances) ctx.tol[k] = v;
  std::vector<int> ids = opt.only;
  if (ids.empty())
    for (int i = 1; i <= static_cast<int>(kCriteria.size()); ++i) ids.push_back(i);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  std::vector<CriterionResult> out;
  for (int id : ids) {
    CriterionResult r;
    r.id = id;
    r.name = criterion_names()[static_cast<size_t>(id - 1)];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      Outcome o = kCriteria[static_cast<size_t>(id - 1)](ctx);
      r.passed = o.passed;
      r.detail = std::move(o.detail);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = {{"error", e.what()}};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (progress) progress(r);
    out.push_back(std::move(r));
  }
  return out;
}

json acceptance_report(const AcceptanceOptions& opt, const std::vector<CriterionResult>& results) {
  json rep;
  rep["version"] = RLAB_VERSION;
  json cfg;
  cfg["seed"] = opt.seed;
  cfg["only"] = opt.only;
  json tol = json::object();
  for (const auto& [k, v] : acceptance_tolerances()) {
    auto it = opt.tolerances.find(k);
    tol[k] = it == opt.tolerances.end() ? v : it->second;
  }
  cfg["tolerances"] = tol;
  rep["config"] = cfg;
  json crit = json::array();
  bool all = true;
  for (const auto& r : results) {
    all &= r.passed;
    crit.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  }
  rep["criteria"] = crit;
  rep["passed"] = all;
  return rep;
}

}  // namespace rlab
