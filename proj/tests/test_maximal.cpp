#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rlab/errors.hpp"
#include "rlab/maximal.hpp"
#include "rlab/rng.hpp"

using namespace rlab;

namespace {

// sup over r in J of (1/2r) int_{xi-r}^{xi+r} |f|, coordinatewise, by direct overlap lengths.
Eigen::VectorXd brute_force(const GridFunction& f, const std::vector<double>& radii, double xi) {
  const Grid& g = f.grid();
  Eigen::VectorXd best = Eigen::VectorXd::Zero(f.dim());
  for (double r : radii) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(f.dim());
    for (Index c = 0; c < g.cells(); ++c) {
      const double a = std::max(g.left(0, c), xi - r), b = std::min(g.left(0, c) + g.step, xi + r);
      if (b > a) acc += (b - a) * f.values().row(c).transpose().cwiseAbs();
    }
    best = best.cwiseMax(acc / (2 * r));
  }
  return best;
}

GridFunction indicator(const Grid& g, double a, double b) {
  return GridFunction::from_function(g, LatticeSpec::scalar(),
                                     [=](const double* c, double* out) { out[0] = (c[0] > a && c[0] < b) ? 1.0 : 0.0; });
}

}  // namespace

TEST_CASE("radius sets") {
  const auto d = RadiusSet::dyadic(0.1, 2.0);
  CHECK(d.radii() == std::vector<double>{0.125, 0.25, 0.5, 1.0, 2.0});
  const auto dense = RadiusSet::dense(0.25, 1.0);
  CHECK(dense.radii() == std::vector<double>{0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0});
  CHECK(dense.contains(0.5));
  CHECK_THROWS_AS(RadiusSet({0.01}, 0.1), InvalidArgument);
  CHECK_THROWS_AS(RadiusSet({}, 0.1), InvalidArgument);
}

TEST_CASE("maximal function examples") {
  const double h = 1.0 / 8;
  const auto g = Grid::line(0.0, 3.0, h);
  const auto f = indicator(g, 0.0, 1.0);
  CHECK(maximal_at(f, RadiusSet({h, 2 * h}, h), 0.5)[0] == doctest::Approx(1.0));
  CHECK(maximal_at(f, RadiusSet::dense(h, 4.0), 2.0)[0] == doctest::Approx(0.25));

  const auto c = GridFunction::from_function(Grid::line(-4.0, 4.0, h), LatticeSpec::parse("l2(2)"),
                                             [](const double*, double* out) { out[0] = 3.0, out[1] = -1.5; });
  // Away from the boundary of the support, averages of a constant are the constant.
  const auto Mc = maximal(c, RadiusSet::dyadic(h, 2.0));
  const Index mid = c.cells() / 2;
  CHECK(Mc.values()(mid, 0) == doctest::Approx(3.0));
  CHECK(Mc.values()(mid, 1) == doctest::Approx(1.5));
}

TEST_CASE("maximal function against brute force") {
  Rng rng(44);
  const double h = 1.0 / 16;
  const auto g = Grid::line(-1.0, 1.0, h);
  CellMatrix v(g.cells(), 3);
  for (Index i = 0; i < v.size(); ++i) v.data()[i] = rng.uniform() < 0.3 ? 0.0 : rng.uniform(-2.0, 2.0);
  const GridFunction f(g, LatticeSpec::parse("l1(3)"), v);
  for (const auto& J : {RadiusSet::dyadic(h, 4.0), RadiusSet::dense(h, 1.5), RadiusSet({0.1, 0.33, 0.7}, h)}) {
    const auto M = maximal(f, J);
    for (Index c = 0; c < g.cells(); ++c) {
      const Eigen::VectorXd ref = brute_force(f, J.radii(), g.center(0, c));
      CHECK((M.values().row(c).transpose() - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
    for (double xi : {-1.3, -0.41, 0.0, 0.77, 2.5}) {
      CHECK((maximal_at(f, J, xi) - brute_force(f, J.radii(), xi)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("dense radii realise the supremum at centres") {
  const double h = 1.0 / 8;
  const auto g = Grid::line(0.0, 2.0, h);
  Rng rng(5);
  CellMatrix v(g.cells(), 1);
  for (Index i = 0; i < v.size(); ++i) v.data()[i] = rng.uniform();
  const GridFunction f(g, LatticeSpec::scalar(), v);
  std::vector<double> fine;
  for (double r = h; r <= 1.0 + 1e-12; r += h / 64) fine.push_back(r);
  const auto M = maximal(f, RadiusSet::dense(h, 1.0));
  for (Index c = 0; c < g.cells(); ++c)
    CHECK(M.values()(c, 0) >= brute_force(f, fine, g.center(0, c))[0] - 1e-12);
}

TEST_CASE("two-dimensional averages") {
  const double h = 1.0 / 8;
  const auto g = Grid::square(-1.0, 1.0, h);
  const auto c = GridFunction::from_function(g, LatticeSpec::scalar(), [](const double*, double* out) { out[0] = 2.0; });
  const auto M = maximal(c, RadiusSet::dyadic(h, 0.5));
  CHECK(M.values()(g.flat(8, 8), 0) == doctest::Approx(2.0));
  CHECK(M.values().maxCoeff() <= 2.0 + 1e-12);
}

TEST_CASE("scalar operator ratio") {
  Rng rng(7);
  const double h = 1.0 / 32;
  const auto g = Grid::line(-2.0, 2.0, h);
  for (int t = 0; t < 10; ++t) {
    CellMatrix v = CellMatrix::Zero(g.cells(), 1);
    for (Index i = 40; i < 88; ++i) v(i, 0) = rng.uniform() < 0.5 ? 0.0 : rng.uniform(-1.0, 1.0);
    if (v.isZero()) v(50, 0) = 1.0;
    const double ratio = hl_operator_ratio(GridFunction(g, LatticeSpec::scalar(), v), RadiusSet::dense(h, 2.0), 2.0);
    CHECK(ratio > 0.5);
    CHECK(ratio <= 4.0);
  }
  // A single cell, against the overlap oracle.
  CellMatrix one = CellMatrix::Zero(g.cells(), 1);
  one(64, 0) = 1.0;
  const GridFunction delta(g, LatticeSpec::scalar(), one);
  const auto J = RadiusSet::dense(h, 4.0);
  double num = 0.0;
  for (Index c = 0; c < g.cells(); ++c) num += std::pow(brute_force(delta, J.radii(), g.center(0, c))[0], 2) * h;
  CHECK(hl_operator_ratio(delta, J, 2.0) == doctest::Approx(std::sqrt(num / h)).epsilon(1e-12));

  CHECK_THROWS_AS(hl_operator_ratio(GridFunction(g, LatticeSpec::scalar()), J, 2.0), InvalidArgument);
}

TEST_CASE("counterexample") {
  CHECK(counterexample_lower_bound(2) == doctest::Approx(std::sqrt(2.0) / 4 * std::sqrt(0.75)));
  CHECK(counterexample_lower_bound(9) == doctest::Approx(0.75 * std::sqrt(1 - 1.0 / 512)));
  for (int n = 2; n <= 5; ++n) {
    const auto inst = build_counterexample(n);
    CHECK(inst.spec.total_dim() == (Index(1) << n) * n);
    CHECK(lp_norm(inst.materialize(), 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    const auto ev = evaluate_counterexample(inst, RadiusSet::dyadic(inst.grid.step, 2.0));
    CHECK(ev.f_norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ev.ratio >= counterexample_lower_bound(n));
    CHECK(ev.window_min_sq >= n / 16.0);
    // Streaming agrees with the materialised function.
    const double direct =
        lp_norm(maximal(inst.materialize(), RadiusSet::dyadic(inst.grid.step, 2.0)), 2.0);
    CHECK(ev.maximal_norm == doctest::Approx(direct).epsilon(1e-12));
  }
  CHECK_THROWS_AS(build_counterexample(0), InvalidArgument);
}
