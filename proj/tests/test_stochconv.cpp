#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rlab/errors.hpp"
#include "rlab/randsum.hpp"
#include "rlab/rng.hpp"
#include "rlab/stochconv.hpp"

using namespace rlab;

namespace {

constexpr double kH = 1.0 / 128;

Grid time_grid() { return Grid::line(0.0, 2.0, kH); }

Kernel on_grid(const char* form) {
  return Kernel::sample(ClosedForm::parse(form), 1, kH, static_cast<Index>(std::lround(4.0 / kH)));
}

GridFunction constant(const Grid& g, const LatticeSpec& spec, double v, double until = 1e300) {
  return GridFunction::from_function(g, spec, [=, m = spec.total_dim()](const double* x, double* out) {
    for (Index j = 0; j < m; ++j) out[j] = x[0] < until ? v : 0.0;
  });
}

GridFunction random_blocks(const Grid& g, const LatticeSpec& spec, Rng& rng) {
  CellMatrix v(g.cells(), spec.total_dim());
  for (Index i = 0; i < g.cells(); i += 16) {
    for (Index j = 0; j < spec.total_dim(); ++j) {
      const double a = rng.uniform() < 0.25 ? 0.0 : rng.uniform(-1.0, 1.0);
      for (Index c = i; c < std::min(i + 16, g.cells()); ++c) v(c, j) = a;
    }
  }
  return {g, spec, v};
}

}  // namespace

TEST_CASE("Brownian increments") {
  const auto path = BrownianPath::generate(20000, 2, 0.01, 42);
  CHECK(path.steps() == 20000);
  CHECK(path.increments.cols() == 2);
  const double var = path.increments.array().square().mean();
  CHECK(var == doctest::Approx(0.01).epsilon(0.03));
  CHECK(std::abs(path.increments.mean()) < 4 * std::sqrt(0.01 / 40000));
  CHECK(BrownianPath::generate(5, 1, 0.1, 42).increments == BrownianPath::generate(5, 1, 0.1, 42).increments);
}

TEST_CASE("flat kernel reproduces the Wiener process") {
  const auto g = time_grid();
  const auto k = on_grid("ind:0:4");
  const std::vector<GridFunction> G = {constant(g, LatticeSpec::scalar(), 1.0)};
  const auto path = BrownianPath::generate(g.cells(), 1, kH, 3);
  const CellMatrix S = stochastic_convolution(k, G, path);
  REQUIRE(S.rows() == g.cells() + 1);
  double w = 0.0;
  for (Index i = 0; i <= g.cells(); ++i) {
    CHECK(S(i, 0) == doctest::Approx(w).epsilon(1e-12).scale(1.0));
    if (i < g.cells()) w += path.increments(i, 0);
  }
  CHECK(stochastic_convolution_at(k, G, path, 100)[0] == doctest::Approx(S(100, 0)));

  // Var S(t) = t.
  const auto rep = ito_check(k, G, 192, 20000, 11);
  REQUIRE(rep.coords.size() == 1);
  CHECK(rep.coords[0].analytic == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(std::abs(rep.coords[0].variance - 1.5) <= 3 * rep.coords[0].std_error);
}

TEST_CASE("Ito isometry for exponential kernels") {
  const auto g = time_grid();
  const auto k = on_grid("exp:2");
  const std::vector<GridFunction> G = {constant(g, LatticeSpec::scalar(), 1.0, 1.0)};
  const Index node = 192;  // t = 1.5
  // int_0^1 k^2(1.5 - s) ds with k = e^{-2|t|}: (e^{-2} - e^{-6}) / 4.
  const double exact = (std::exp(-2.0) - std::exp(-6.0)) / 4.0;
  CHECK(ito_variance(k, G, node)[0] == doctest::Approx(exact).epsilon(1e-9));
  CHECK(ito_variance_discrete(k, G, node)[0] == doctest::Approx(exact).epsilon(1e-2));
  const auto rep = ito_check(k, G, node, 10000, 5);
  const auto& c = rep.coords[0];
  CHECK(std::abs(c.variance - c.analytic) <= 3 * c.std_error);
  CHECK(std::abs(c.mean) <= 3 * c.mean_error);
}

TEST_CASE("vector-valued isometry with several directions") {
  Rng rng(17);
  const auto g = time_grid();
  const auto spec = LatticeSpec::parse("l2(2)");
  const auto k = on_grid("gauss:0.3");
  const std::vector<GridFunction> G = {random_blocks(g, spec, rng), random_blocks(g, spec, rng),
                                       random_blocks(g, spec, rng)};
  const auto rep = ito_check(k, G, 200, 10000, 8);
  REQUIRE(rep.coords.size() == 2);
  for (const auto& c : rep.coords) CHECK(std::abs(c.variance - c.analytic) <= 3 * c.std_error);
}

TEST_CASE("covariance of the isonormal process") {
  const Index steps = 64;
  const double dt = 1.0 / steps;
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(steps, 2), g = Eigen::MatrixXd::Zero(steps, 2);
  f.col(0).setOnes();
  g.col(1).setOnes();
  const auto orth = wiener_covariance(f, g, dt, 20000, 4);
  CHECK(orth.exact == 0.0);
  CHECK(orth.passed());
  CHECK(std::abs(orth.correlation) < 0.05);
  g.col(0).head(32).setConstant(2.0);
  const auto overlap = wiener_covariance(f, g, dt, 20000, 4);
  CHECK(overlap.exact == doctest::Approx(1.0));
  CHECK(overlap.passed());
}

TEST_CASE("second moment against Gaussian sums") {
  Rng rng(23);
  const auto g = time_grid();
  const auto spec = LatticeSpec::parse("l4(2)");
  const std::vector<GridFunction> G = {random_blocks(g, spec, rng)};
  const auto cmp = l2_moment_comparison(on_grid("exp:1"), G, 160, 20000, 6);
  CHECK(cmp.passed());
}

TEST_CASE("Burkholder probe") {
  const auto g = time_grid();
  const auto probe = burkholder_probe(constant(g, LatticeSpec::scalar(), 1.0, 1.0), 4.0, 4000, 9);
  CHECK(probe.l2_norm == doctest::Approx(1.0));
  CHECK(probe.ratio > 1.0);
  CHECK(probe.ratio <= 2.0);
}

TEST_CASE("the operator N_k") {
  const auto g = Grid::line(-1.0, 1.0, kH);
  SUBCASE("zero integrand") {
    const auto app = apply_Nk(on_grid("exp:1"), GridFunction(g, LatticeSpec::parse("l2(2)")), 4.0);
    CHECK(app.norm == 0.0);
  }
  SUBCASE("exponent range") {
    const GridFunction G = constant(g, LatticeSpec::scalar(), 1.0);
    CHECK_THROWS_AS(apply_Nk(on_grid("exp:1"), G, 1.5), InvalidArgument);
    CHECK_THROWS_AS(apply_Nk(on_grid("exp:1"), G, Exponent::infinity()), InvalidArgument);
  }
  SUBCASE("Young bound") {
    Rng rng(2);
    for (const char* form : {"exp:1", "gauss:0.2", "ind:-0.5:0.5", "poisson:0.3"}) {
      const auto k = on_grid(form);
      const auto G = random_blocks(g, LatticeSpec::scalar(), rng);
      for (double p : {2.0, 3.0, 6.0}) {
        const double k2 = std::sqrt(k.samples().squaredNorm() * kH);
        CHECK(apply_Nk(k, G, p).norm <= k2 * lp_norm(G, p) + 5 * kH);
      }
    }
  }
  SUBCASE("image slices") {
    const auto G = constant(g, LatticeSpec::scalar(), 2.0);
    const auto k = on_grid("exp:1");
    const NkImage img(k, G);
    const auto slice = img.at(100);
    for (Index s = 0; s < g.cells(); s += 37) CHECK(slice.values()(s, 0) == doctest::Approx(2.0 * k.at(100 - s)));
  }
  SUBCASE("small intervals") {
    const auto lg = Grid::line(-0.5, 1.5, 1.0 / 512);
    const auto k = Kernel::sample(ClosedForm::indicator(0.0, 1.0), 1, lg.step, 1024);
    for (double r : {0.125, 0.0625}) {
      const auto G = constant(lg, LatticeSpec::scalar(), 1.0, r);
      for (double p : {2.0, 4.0}) {
        const double ratio = apply_Nk(k, G, p).norm / lp_norm(G, p);
        CHECK(ratio >= std::pow(r, 0.5 - 1.0 / p) * std::pow(0.5, 1.0 / p) - 10 * lg.step);
      }
    }
  }
}

TEST_CASE("concavification identity") {
  Rng rng(29);
  const auto g = Grid::line(-1.0, 1.0, 1.0 / 32);
  const auto spec = LatticeSpec::parse("l2(2,l4(3))");
  std::vector<Kernel> ks;
  std::vector<GridFunction> G;
  for (const char* form : {"exp:1", "gauss:0.3", "ind:-0.25:0.5"}) {
    ks.push_back(Kernel::sample(ClosedForm::parse(form), 1, g.step, 128));
    G.push_back(random_blocks(g, spec, rng));
  }
  CHECK(concavification_identity_deviation(ks, G) <= 1e-9);
  CHECK_THROWS_AS(concavification_identity_deviation(ks, std::span<const GridFunction>(G).first(2)), DimensionMismatch);
}

TEST_CASE("equivalence experiment") {
  const auto g = Grid::line(-1.0, 1.0, 1.0 / 16);
  SearchOptions opt;
  opt.budget = 300;
  opt.restarts = 2;
  opt.seed = 3;
  SUBCASE("singleton on the real line") {
    const std::vector<Kernel> ks = {Kernel::sample(ClosedForm::exponential(2.0), 1, g.step, 64)};
    const auto rep = equivalence_experiment(ks, {Exponent(4.0), LatticeSpec::scalar(), g}, opt);
    CHECK(rep.ratio >= 0.9);
    CHECK(rep.ratio <= 1.1);
    CHECK(rep.identity_deviation <= 1e-9);
  }
  SUBCASE("lattices must be 2-convex") {
    const std::vector<Kernel> ks = {Kernel::sample(ClosedForm::exponential(2.0), 1, g.step, 64)};
    CHECK_THROWS_AS(equivalence_experiment(ks, {Exponent(4.0), LatticeSpec::parse("l1(2)"), g}, opt),
                    InvalidArgument);
  }
}

TEST_CASE("mismatched time steps") {
  const auto g = time_grid();
  const std::vector<GridFunction> G = {constant(g, LatticeSpec::scalar(), 1.0)};
  const auto path = BrownianPath::generate(g.cells(), 1, kH / 2, 1);
  CHECK_THROWS_AS(stochastic_convolution(on_grid("exp:1"), G, path), InvalidArgument);
  const auto wide = BrownianPath::generate(g.cells(), 2, kH, 1);
  CHECK_THROWS_AS(stochastic_convolution(on_grid("exp:1"), G, wide), DimensionMismatch);
}
