#include <doctest.h>

#include <cmath>

#include "rlab/errors.hpp"
#include "rlab/randsum.hpp"
#include "rlab/rng.hpp"

using namespace rlab;

namespace {

LatticeVec vec(const char* spec, std::vector<double> c) {
  return {LatticeSpec::parse(spec), Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Index>(c.size()))};
}

std::vector<LatticeVec> random_family(const LatticeSpec& spec, Index n, Rng& rng) {
  std::vector<LatticeVec> xs;
  for (Index i = 0; i < n; ++i) {
    Eigen::VectorXd c(spec.total_dim());
    for (Index j = 0; j < c.size(); ++j) c[j] = rng.normal();
    xs.push_back({spec, c});
  }
  return xs;
}

}  // namespace

TEST_CASE("Rademacher sums by enumeration") {
  const std::vector<LatticeVec> one = {vec("l3(2,l2(2))", {1, -2, 0.5, 3})};
  for (double p : {1.0, 2.0, 3.5}) {
    const auto e = rademacher_sum_Lp(one, p);
    CHECK(e.method == SumMethod::ExactEnumeration);
    CHECK(e.value == doctest::Approx(one[0].norm()).epsilon(1e-14));
  }
  const std::vector<LatticeVec> ones = {vec("l2(1)", {1}), vec("l2(1)", {1})};
  CHECK(rademacher_sum_Lp(ones, 2.0).value == doctest::Approx(std::sqrt(2.0)));
  const std::vector<LatticeVec> disjoint = {vec("l1(2)", {1, 0}), vec("l1(2)", {0, 1})};
  CHECK(rademacher_sum_Lp(disjoint, 2.0).value == doctest::Approx(2.0));

  // Khintchine for p = 4 and x = (1, 1, 1): E(r1+r2+r3)^4 = 3 * 9 - 2 * 3 = 21.
  const std::vector<LatticeVec> three = {vec("l2(1)", {1}), vec("l2(1)", {1}), vec("l2(1)", {1})};
  CHECK(rademacher_sum_Lp(three, 4.0).value == doctest::Approx(std::pow(21.0, 0.25)));

  CHECK_THROWS_AS(rademacher_sum_Lp(std::span<const LatticeVec>{}, 2.0), InvalidArgument);
  CHECK_THROWS_AS(rademacher_sum_Lp(one, Exponent::infinity()), InvalidArgument);
}

TEST_CASE("Monte Carlo agrees with enumeration") {
  Rng rng(3);
  const auto spec = LatticeSpec::parse("l4(3,l1(2))");
  const auto xs = random_family(spec, 10, rng);
  const auto exact = rademacher_sum_Lp(xs, 3.0, {0, 0, 16});
  const auto mc = rademacher_sum_Lp(xs, 3.0, {200000, 9, 4});
  CHECK(mc.method == SumMethod::MonteCarlo);
  CHECK(std::abs(mc.value - exact.value) <= 4 * mc.std_error);
  // Fixed seeds reproduce.
  CHECK(rademacher_sum_Lp(xs, 3.0, {5000, 9, 4}).value == rademacher_sum_Lp(xs, 3.0, {5000, 9, 4}).value);
}

TEST_CASE("contraction principle") {
  Rng rng(8);
  const auto spec = LatticeSpec::parse("l1(2,l3(3))");
  for (int t = 0; t < 10; ++t) {
    auto xs = random_family(spec, 6, rng);
    const double full = rademacher_sum_Lp(xs, 1.5).value;
    for (auto& x : xs) x.coords *= rng.uniform(-1.0, 1.0);
    CHECK(rademacher_sum_Lp(xs, 1.5).value <= full * (1 + 1e-12));
  }
}

TEST_CASE("Gaussian sums") {
  Rng rng(12);
  const SumOptions opt{100000, 21, -1};
  SUBCASE("Hilbert space orthogonality") {
    const auto spec = LatticeSpec::parse("l2(5)");
    const auto xs = random_family(spec, 4, rng);
    double sq = 0.0;
    for (const auto& x : xs) sq += x.norm() * x.norm();
    const auto e = gaussian_sum_Lp(xs, 2.0, opt);
    CHECK(std::abs(e.value - std::sqrt(sq)) <= 3 * e.std_error);
  }
  SUBCASE("single vector") {
    const std::vector<LatticeVec> one = {vec("l3(3)", {1, 2, -2})};
    const auto e = gaussian_sum_Lp(one, 2.0, opt);
    CHECK(std::abs(e.value - one[0].norm()) <= 3 * e.std_error);
  }
  SUBCASE("high-sample reference") {
    const auto spec = LatticeSpec::parse("l4(2)");
    const auto xs = random_family(spec, 3, rng);
    const auto ref = gaussian_sum_Lp(xs, 4.0, {1000000, 77, -1});
    const auto e = gaussian_sum_Lp(xs, 4.0, opt);
    CHECK(std::abs(e.value - ref.value) <= 3 * std::hypot(e.std_error, ref.std_error));
  }
}

TEST_CASE("square function") {
  const auto g = Grid::line(0.0, 3.0, 0.25);
  const auto spec = LatticeSpec::parse("l3(2)");
  auto unit = [&](double a) {
    return GridFunction::from_function(g, spec, [=](const double* c, double* out) {
      const bool in = c[0] > a && c[0] < a + 1;
      out[0] = in ? 2.0 : 0.0;
      out[1] = in ? -1.0 : 0.0;
    });
  };
  const double xn = vec("l3(2)", {2, -1}).norm();
  const std::vector<GridFunction> single = {unit(0.0)};
  CHECK(square_function_norm(single) == doctest::Approx(xn));
  const std::vector<GridFunction> pair = {unit(0.0), unit(1.5)};
  CHECK(square_function_norm(pair) == doctest::Approx(std::sqrt(2.0) * xn));
}

TEST_CASE("gamma norm against the square function") {
  Rng rng(31);
  const auto g = Grid::line(0.0, 1.0, 0.125);
  for (const char* text : {"l2(3)", "l4(2,l2(2))", "l1.5(3)"}) {
    const auto spec = LatticeSpec::parse(text);
    std::vector<GridFunction> gs;
    for (int n = 0; n < 2; ++n) {
      CellMatrix v(g.cells(), spec.total_dim());
      for (Index i = 0; i < v.size(); ++i) v.data()[i] = rng.normal();
      gs.emplace_back(g, spec, v);
    }
    const double sq = square_function_norm(gs);
    const auto gam = gamma_norm_mc(gs, {50000, 5, -1});
    if (std::string(text) == "l2(3)") {
      CHECK(std::abs(gam.value - sq) <= 3 * gam.std_error);
    } else {
      // Two-sided comparison with constants depending only on the lattice.
      CHECK(gam.value / sq > 0.5);
      CHECK(gam.value / sq < 2.0);
    }
  }
}

TEST_CASE("type 2 probe") {
  CHECK(type2_constant_probe(LatticeSpec::parse("l2(4)"), 30, 1) == doctest::Approx(1.0).epsilon(1e-12));
  const double l1 = type2_constant_probe(LatticeSpec::parse("l1(2)"), 30, 1);
  CHECK(l1 >= std::sqrt(2.0) - 1e-12);
  CHECK(l1 <= std::sqrt(2.0) + 1e-9);
  for (Index m : {2, 8, 64}) {
    const auto spec = LatticeSpec({Level{Exponent(4.0), m}});
    CHECK(type2_constant_probe(spec, 30, 2) <= 2.0);
  }
}
