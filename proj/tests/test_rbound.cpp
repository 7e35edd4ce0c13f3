#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>

#include "rlab/errors.hpp"
#include "rlab/rbound.hpp"

using namespace rlab;

namespace {

SpaceSpec space(const char* p, const char* x, const Grid& g) { return {Exponent::parse(p), LatticeSpec::parse(x), g}; }

SearchOptions small(Index budget = 400, std::uint64_t seed = 5) {
  SearchOptions o;
  o.budget = budget;
  o.restarts = 2;
  o.seed = seed;
  o.ascent_steps = 10;
  return o;
}

// Matrix of f -> k*f on the grid, for an independent operator norm.
Eigen::MatrixXd convolution_matrix(const Kernel& k, const Grid& g) {
  const Index n = g.cells();
  Eigen::MatrixXd a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = k.at(i - j) * g.step;
  return a;
}

}  // namespace

TEST_CASE("identity family") {
  const auto g = Grid::line(0.0, 1.0, 1.0 / 16);
  const OperatorFamily id({Kernel::dirac(1, g.step), Kernel::dirac(1, g.step)}, space("3", "l2(2)", g));
  for (const char* s : {"1", "2", "inf"}) {
    const auto est = estimate_ls_bound(id, Exponent::parse(s), small(200));
    CHECK(est.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.is_lower_bound);
  }
  CHECK(estimate_R_bound(id, small(200)).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single positive kernel") {
  const double h = 1.0 / 32;
  const auto g = Grid::line(-1.0, 1.0, h);
  const auto k = Kernel::sample(ClosedForm::exponential(2.0), 1, h, 128);
  const OperatorFamily fam({k}, space("2", "l2(1)", g));
  const auto est = estimate_ls_bound(fam, 1.0, small(600));
  const double l1 = k.samples().sum() * h;
  CHECK(est.value <= l1 * (1 + 1e-12));
  CHECK(est.value <= 1.0 + 2 * h);
  CHECK(est.value > 0.5);

  // The R-bound of a singleton is the operator norm; on L^2 this is the top singular value.
  const double sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(convolution_matrix(k, g)).singularValues()[0];
  const auto r = estimate_R_bound(fam, small(4000));
  CHECK(r.value <= sigma * (1 + 1e-9));
  CHECK(r.value >= 0.98 * sigma);
}

TEST_CASE("scalar multiples of the identity") {
  const double h = 1.0 / 8;
  const auto g = Grid::line(0.0, 1.0, h);
  const std::vector<double> c = {0.5, -1.75, 1.0};
  std::vector<Kernel> ks;
  for (double v : c) ks.push_back(Kernel::dirac(1, h).scaled(v));
  const OperatorFamily fam(ks, space("2", "l3(2)", g));
  const auto r = estimate_R_bound(fam, small(1500));
  CHECK(r.value <= 1.75 * (1 + 1e-12));
  CHECK(r.value >= 1.75 * 0.98);
}

TEST_CASE("witnesses reproduce their values") {
  const double h = 1.0 / 16;
  const auto g = Grid::line(-1.0, 1.0, h);
  const auto sp = space("4", "l2(2,l4(2))", g);
  const auto fam = OperatorFamily::from_strings(std::vector<std::string>{"exp:1", "exp:4", "gauss:0.2"}, sp);
  const auto est = estimate_ls_bound(fam, 2.0, small(600, 9));
  CHECK(evaluate_ls_ratio(fam, 2.0, est.functions()) == doctest::Approx(est.value).epsilon(1e-9));
  const auto again = estimate_ls_bound(fam, 2.0, small(600, 9));
  CHECK(again.value == est.value);
  const auto r = estimate_R_bound(fam, small(600, 9));
  CHECK(evaluate_R_ratio(fam, r.functions()) == doctest::Approx(r.value).epsilon(1e-9));

  SUBCASE("homogeneity under scaling") {
    const auto scaled = estimate_ls_bound(fam.scaled(-2.5), 2.0, small(600, 9));
    CHECK(scaled.value == doctest::Approx(2.5 * est.value).epsilon(1e-9));
  }
}

TEST_CASE("bounds grow with the family") {
  const double h = 1.0 / 16;
  const auto g = Grid::line(-1.0, 1.0, h);
  const auto fam =
      OperatorFamily::from_strings(std::vector<std::string>{"exp:1", "exp:2", "exp:4", "exp:8"}, space("2", "l1(2)", g));
  double prev = 0.0;
  std::vector<GridFunction> warm;
  for (Index n = 1; n <= fam.size(); ++n) {
    auto opt = small(300);
    if (!warm.empty()) {
      warm.emplace_back(g, LatticeSpec::parse("l1(2)"));
      opt.seeds.push_back(warm);
    }
    const auto est = estimate_ls_bound(fam.prefix(n), 1.0, opt);
    CHECK(est.value >= prev * (1 - 1e-12));
    prev = est.value;
    warm = est.functions();
  }
}

TEST_CASE("duality") {
  const double h = 1.0 / 16;
  const auto g = Grid::line(-1.0, 1.0, h);
  SUBCASE("identity") {
    const OperatorFamily id({Kernel::dirac(1, h)}, space("3", "l1.5(2)", g));
    const auto rep = duality_check(id, 2.0, small(200));
    CHECK(rep.passed());
    CHECK(rep.primal_value == doctest::Approx(1.0));
    CHECK(rep.dual_estimate == doctest::Approx(1.0));
  }
  SUBCASE("self-adjoint kernel on a Hilbert lattice") {
    const auto fam = OperatorFamily::from_strings(std::vector<std::string>{"gauss:0.2"}, space("2", "l2(2)", g));
    const auto rep = duality_check(fam, 2.0, small(400));
    CHECK(rep.passed());
    CHECK(rep.pairing_error < 1e-9);
    CHECK(rep.dual_estimate >= rep.primal_value * (1 - 1e-6));
    CHECK(rep.non_strict_levels.empty());
  }
  SUBCASE("exponential family, s = 1 against s' = inf") {
    const auto fam = OperatorFamily::from_strings(std::vector<std::string>{"exp:1", "exp:4"}, space("3", "l2(2)", g));
    const auto rep = duality_check(fam, 1.0, small(400));
    CHECK(rep.passed());
    CHECK(rep.dual_estimate >= rep.primal_value * (1 - 1e-6));
    CHECK_FALSE(rep.non_strict_levels.empty());
  }
}

TEST_CASE("search errors") {
  const double h = 1.0 / 8;
  const auto g = Grid::line(0.0, 1.0, h);
  const OperatorFamily fam({Kernel::dirac(1, h), Kernel::dirac(1, h)}, space("2", "l2(1)", g));
  SearchOptions opt = small(100);
  opt.restarts = 1;
  opt.seeds = {{GridFunction(g, LatticeSpec::scalar()), GridFunction(g, LatticeSpec::scalar())}};
  CHECK_THROWS_AS(estimate_ls_bound(fam, 2.0, opt), DegenerateWitness);
  opt.seeds = {{GridFunction(g, LatticeSpec::scalar())}};
  CHECK_THROWS_AS(estimate_ls_bound(fam, 2.0, opt), DimensionMismatch);
  CHECK_THROWS_AS(OperatorFamily({}, space("2", "l2(1)", g)), InvalidArgument);
  CHECK_THROWS_AS(SpaceSpec::parse("p=2", g), ConfigError);
  CHECK(SpaceSpec::parse("p=4,X=l2(3,l4(2))", g).spec.total_dim() == 6);
}
