#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rlab/admissibility.hpp"
#include "rlab/errors.hpp"
#include "rlab/quadrature.hpp"

using namespace rlab;

TEST_CASE("closed form grammar") {
  CHECK(ClosedForm::parse("exp:2").type == KernelType::Exponential);
  CHECK(ClosedForm::parse("ind:0:1").p2 == 1.0);
  CHECK(ClosedForm::parse("2*exp:1").scale == 2.0);
  const auto e = ClosedForm::parse("expsum:1:1:-0.5:3");
  CHECK(e.coeffs.size() == 2);
  CHECK(e.rates[1] == 3.0);
  CHECK(ClosedForm::parse(ClosedForm::parse("power:1.5:0.1").to_string()).p1 == 1.5);
  CHECK_THROWS_AS(ClosedForm::parse("exp"), InvalidArgument);
  CHECK_THROWS_AS(ClosedForm::parse("nope:1"), InvalidArgument);
  CHECK_THROWS_AS(ClosedForm::parse("exp:-1"), InvalidArgument);
  CHECK_THROWS_AS(ClosedForm::parse("ind:1:0"), InvalidArgument);
}

TEST_CASE("analytic masses") {
  CHECK(ClosedForm::exponential(3.0).l1(1) == doctest::Approx(1.0));
  CHECK(ClosedForm::exponential(3.0).l1(2) == doctest::Approx(1.0));
  CHECK(ClosedForm::gaussian(0.7).l1(1) == doctest::Approx(1.0));
  CHECK(ClosedForm::poisson(0.5).l1(2) == doctest::Approx(1.0));
  CHECK(ClosedForm::power(1.5, 0.1).l1(1) == doctest::Approx(1.0));
  CHECK(ClosedForm::one_sided_exponential(2.0).l1(1) == doctest::Approx(0.5));
  // The stated tail agrees with direct quadrature.
  const auto g = ClosedForm::gaussian(1.0);
  const double tail = 2.0 * integrate_half_line([&](double t) { return g.eval(t + 1.5); }, {}, 1e-13);
  CHECK(g.tail_mass(1.5, 1) == doctest::Approx(tail).epsilon(1e-9));
}

TEST_CASE("grid L1 norms") {
  for (double lambda : {0.5, 1.0, 2.0}) {
    const double h = 1e-3;
    const auto radius = static_cast<Index>(std::ceil(20.0 / lambda / h));
    const auto k = Kernel::sample(ClosedForm::exponential(lambda), 1, h, radius);
    CHECK(std::abs(l1_norm(k) - 1.0) <= 1e-6);
    CHECK(certify(k, Criterion::RadialMajorant).passed);
  }
  const double h = 1.0 / 1024;
  CHECK(l1_norm(Kernel::sample(ClosedForm::indicator(0.0, 1.0), 1, h, 2048)) == doctest::Approx(1.0).epsilon(1e-12));
  const auto twice = Kernel::sample(ClosedForm::exponential(1.0).scaled(2.0), 1, h, 8192);
  CHECK(l1_norm(twice) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK_FALSE(certify(twice, Criterion::RadialMajorant).passed);
}

TEST_CASE("radial majorant") {
  const double h = 1.0 / 1024;
  SUBCASE("radially decreasing kernels equal their L1 norm") {
    for (const char* text : {"exp:2", "gauss:0.5", "poisson:0.5"}) {
      const auto k = Kernel::sample(ClosedForm::parse(text), 1, h, 8192);
      CHECK(radial_majorant_integral(k) == doctest::Approx(l1_norm(k)).epsilon(1e-9));
    }
    const auto centred = Kernel::sample(ClosedForm::indicator(-0.5, 0.5), 1, h, 1024);
    CHECK(radial_majorant_integral(centred) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("the majorant fills a hole") {
    // k = 1_{(1,2)}(|t|) / 2, half values at the jumps.
    const Index one = 1024, r = 2 * one + 8;
    Eigen::VectorXd s = Eigen::VectorXd::Zero(2 * r + 1);
    for (Index m = -r; m <= r; ++m) {
      const Index a = std::abs(m);
      s[m + r] = (a > one && a < 2 * one) ? 0.5 : (a == one || a == 2 * one) ? 0.25 : 0.0;
    }
    const auto k = Kernel::from_samples(s, 1, h, r, 0.0, "hole");
    CHECK(l1_norm(k) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(radial_majorant_integral(k) == doctest::Approx(2.0).epsilon(1e-6));
  }
  SUBCASE("a truncated kernel without tail information is rejected") {
    const auto k = Kernel::sample(ClosedForm::exponential(1.0), 1, h, 64);
    const auto bare = Kernel::from_samples(k.samples(), 1, h, 64, std::nullopt);
    CHECK_THROWS_AS(radial_majorant_integral(bare), DomainTooSmall);
  }
  SUBCASE("two dimensions") {
    const auto k = Kernel::sample(ClosedForm::exponential(4.0), 2, 1.0 / 64, 256);
    CHECK(radial_majorant_integral(k) == doctest::Approx(l1_norm(k)).epsilon(1e-3));
  }
}

TEST_CASE("gradient criterion") {
  CHECK(unit_ball_volume(1) == 2.0);
  CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi));
  const double h = 1.0 / 256;
  const auto e = Kernel::sample(ClosedForm::exponential(1.0), 1, h, 4096);
  CHECK(gradient_criterion(e) == doctest::Approx(1.0).epsilon(1e-9));

  // Gaussian against an independent quadrature of rho |k'(rho)|.
  const double sigma = 0.8;
  const auto g = Kernel::sample(ClosedForm::gaussian(sigma), 1, h, 4096);
  const double ref = 2.0 * integrate_half_line(
                               [&](double r) {
                                 return r * r / (sigma * sigma) * std::exp(-r * r / (2 * sigma * sigma)) /
                                        (sigma * std::sqrt(2 * std::numbers::pi));
                               },
                               {}, 1e-13);
  CHECK(gradient_criterion(g) == doctest::Approx(ref).epsilon(1e-6));
  CHECK(gradient_criterion(g) >= radial_majorant_integral(g) - 1e-9);

  // Sampled kernel that is flat up to the box edge.
  const auto flat = Kernel::from_samples(Eigen::VectorXd::Ones(33), 1, h, 16, std::nullopt);
  CHECK_THROWS_AS(gradient_criterion(flat), NonDecayingKernel);
  CHECK_THROWS_AS(certify(flat, Criterion::Gradient), NonDecayingKernel);
}

TEST_CASE("class S") {
  const auto k = Kernel::sample(ClosedForm::one_sided_exponential(1.0), 1, 1.0 / 64, 4096);
  const auto r = class_S_check(k);
  CHECK(r.s_value == doctest::Approx(std::sqrt(std::numbers::pi) / 2).epsilon(1e-9));
  CHECK(r.squared_bound == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(r.chain_holds);
  CHECK(r.in_class);

  const auto zero = Kernel::from_samples(Eigen::VectorXd::Zero(9), 1, 0.1, 4, 0.0);
  const auto z = class_S_check(zero);
  CHECK(z.s_value == 0.0);
  CHECK(z.squared_bound == 0.0);
  CHECK(z.in_class);

  // Sampled version of e^{-t} converges to the same values.
  Eigen::VectorXd s = Eigen::VectorXd::Zero(2 * 4096 + 1);
  for (Index m = 0; m <= 4096; ++m) s[m + 4096] = std::exp(-static_cast<double>(m) / 256.0);
  const auto sampled = class_S_check(Kernel::from_samples(s, 1, 1.0 / 256, 4096, 0.0));
  CHECK(sampled.s_value == doctest::Approx(std::sqrt(std::numbers::pi) / 2).epsilon(1e-2));

  CHECK_THROWS_AS(class_S_check(Kernel::sample(ClosedForm::exponential(1.0), 1, 0.1, 100)), InvalidArgument);
}

TEST_CASE("kernel transformations") {
  const double h = 1.0 / 32;
  const auto k = Kernel::sample(ClosedForm::indicator(0.0, 1.0), 1, h, 40);
  const auto sq = k.scaled(3.0).squared();
  for (Index m = -40; m <= 40; ++m) CHECK(sq.at(m) == doctest::Approx(9.0 * k.at(m) * k.at(m)));
  const auto d = Kernel::dirac(2, h);
  CHECK(d.at(0, 0) == doctest::Approx(1.0 / (h * h)));
  CHECK(d.at(1, 0) == 0.0);
  const auto fine = Kernel::sample(ClosedForm::exponential(2.0), 1, h, 64).resampled(h / 2, 128);
  CHECK(fine.step() == h / 2);
  CHECK(fine.at(2) == doctest::Approx(ClosedForm::exponential(2.0).eval(h)));
  CHECK_THROWS_AS(Kernel::from_samples(Eigen::VectorXd::Zero(4), 1, h, 2, 0.0), DimensionMismatch);
}
