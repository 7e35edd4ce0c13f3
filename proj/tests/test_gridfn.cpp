#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rlab/gridfn.hpp"
#include "rlab/rng.hpp"

using namespace rlab;

namespace {

GridFunction random_function(const Grid& g, const LatticeSpec& spec, Rng& rng) {
  CellMatrix v(g.cells(), spec.total_dim());
  for (Index i = 0; i < v.size(); ++i) v.data()[i] = rng.uniform(-1.0, 1.0);
  return {g, spec, v};
}

Kernel random_kernel(int d, double h, Index radius, Rng& rng) {
  const Index n = d == 1 ? 2 * radius + 1 : (2 * radius + 1) * (2 * radius + 1);
  Eigen::VectorXd s(n);
  for (Index i = 0; i < n; ++i) s[i] = rng.uniform(-1.0, 1.0);
  return Kernel::from_samples(s, d, h, radius, 0.0);
}

// Direct double sum (k*f)_i = h^d sum_j k(i-j) f_j, written independently of the library.
CellMatrix direct(const Kernel& k, const GridFunction& f) {
  const Grid& g = f.grid();
  CellMatrix out = CellMatrix::Zero(f.cells(), f.dim());
  if (g.dim == 1) {
    for (Index i = 0; i < g.extent[0]; ++i)
      for (Index j = 0; j < g.extent[0]; ++j) out.row(i) += k.at(i - j) * f.values().row(j) * g.step;
  } else {
    for (Index i0 = 0; i0 < g.extent[0]; ++i0)
      for (Index i1 = 0; i1 < g.extent[1]; ++i1)
        for (Index j0 = 0; j0 < g.extent[0]; ++j0)
          for (Index j1 = 0; j1 < g.extent[1]; ++j1)
            out.row(g.flat(i0, i1)) += k.at(i0 - j0, i1 - j1) * f.values().row(g.flat(j0, j1)) * g.cell_volume();
  }
  return out;
}

}  // namespace

TEST_CASE("grid construction") {
  const auto g = Grid::line(-1.0, 1.0, 0.25);
  CHECK(g.cells() == 8);
  CHECK(g.center(0, 0) == doctest::Approx(-0.875));
  const auto sq = Grid::square(0.0, 1.0, 0.125);
  CHECK(sq.cells() == 64);
  CHECK(sq.cell_volume() == doctest::Approx(1.0 / 64));
  CHECK_THROWS(Grid::line(0.0, 1.0, -0.1));
  CHECK_THROWS(Grid::line(0.0, 1.0, 0.3));
}

TEST_CASE("Lp norms of simple functions") {
  const auto g = Grid::line(0.0, 2.0, 0.25);
  const auto ind = GridFunction::from_function(g, LatticeSpec::scalar(),
                                               [](const double* c, double* out) { out[0] = c[0] < 1.0 ? 1.0 : 0.0; });
  CHECK(lp_norm(ind, 2.0) == doctest::Approx(1.0));
  CHECK(lp_norm(ind, Exponent::infinity()) == 1.0);

  GridFunction scaled = ind;
  scaled.values() *= -3.0;
  CHECK(lp_norm(scaled, 2.0) == doctest::Approx(3.0));

  const auto vec = GridFunction::from_function(g, LatticeSpec::parse("l2(2)"), [](const double* c, double* out) {
    out[0] = c[0] < 1.0 ? 3.0 : 0.0;
    out[1] = c[0] < 1.0 ? 4.0 : 0.0;
  });
  CHECK(lp_norm(vec, 1.0) == doctest::Approx(5.0));
  CHECK(lp_norm(vec, 3.0) == doctest::Approx(5.0));
}

TEST_CASE("convolution examples") {
  SUBCASE("unit box autoconvolution peaks at one") {
    const double h = 1.0 / 256;
    const auto g = Grid::line(-1.0, 3.0, h);
    const auto f = GridFunction::from_function(
        g, LatticeSpec::scalar(), [](const double* c, double* out) { out[0] = (c[0] > 0 && c[0] < 1) ? 1.0 : 0.0; });
    const auto k = Kernel::sample(ClosedForm::indicator(0.0, 1.0), 1, h, 1024);
    const auto kf = convolve(k, f);
    double peak = 0.0;
    Index at = 0;
    for (Index i = 0; i < kf.cells(); ++i)
      if (kf.values()(i, 0) > peak) peak = kf.values()(i, 0), at = i;
    CHECK(peak == doctest::Approx(1.0).epsilon(2 * h));
    CHECK(g.center(0, at) == doctest::Approx(1.0).epsilon(2 * h));
  }
  SUBCASE("dirac kernel is the identity") {
    Rng rng(1);
    const auto g = Grid::line(0.0, 1.0, 1.0 / 32);
    const auto f = random_function(g, LatticeSpec::parse("l3(2)"), rng);
    CHECK(convolve(Kernel::dirac(1, g.step), f).values().isApprox(f.values(), 1e-14));
    const auto g2 = Grid::square(0.0, 1.0, 1.0 / 8);
    const auto f2 = random_function(g2, LatticeSpec::scalar(), rng);
    CHECK(convolve(Kernel::dirac(2, g2.step), f2).values().isApprox(f2.values(), 1e-14));
  }
  SUBCASE("exponential against the analytic integral") {
    const double h = 1.0 / 2048;
    const auto g = Grid::line(-1.0, 2.0, h);
    const auto f = GridFunction::from_function(
        g, LatticeSpec::scalar(), [](const double* c, double* out) { out[0] = (c[0] > 0 && c[0] < 1) ? 1.0 : 0.0; });
    const auto k = Kernel::sample(ClosedForm::exponential(2.0), 1, h, 6144);
    const auto kf = convolve(k, f);
    // Cell whose left edge is 0.5: the Riemann sum of a kernel evaluated at
    // half-step offsets, so compare the average of the two cells around t = 0.5.
    const Index i = static_cast<Index>(std::lround((0.5 - g.origin[0]) / h));
    const double v = 0.5 * (kf.values()(i - 1, 0) + kf.values()(i, 0));
    CHECK(v == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-3));
  }
}

TEST_CASE("convolution matches the direct double sum") {
  Rng rng(21);
  const auto g = Grid::line(0.0, 1.0, 1.0 / 40);
  const auto f = random_function(g, LatticeSpec::parse("l2(3)"), rng);
  const auto k = random_kernel(1, g.step, 17, rng);
  const CellMatrix ref = direct(k, f);
  CHECK((convolve(k, f, ConvolutionMethod::Direct).values() - ref).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((convolve(k, f, ConvolutionMethod::FFT).values() - ref).cwiseAbs().maxCoeff() < 1e-12);

  const auto g2 = Grid::square(0.0, 1.0, 1.0 / 10);
  const auto f2 = random_function(g2, LatticeSpec::parse("l1(2)"), rng);
  const auto k2 = random_kernel(2, g2.step, 6, rng);
  const CellMatrix ref2 = direct(k2, f2);
  CHECK((convolve(k2, f2, ConvolutionMethod::Direct).values() - ref2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((convolve(k2, f2, ConvolutionMethod::FFT).values() - ref2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("FFT and direct paths agree on a large grid") {
  Rng rng(4);
  const auto g = Grid::line(0.0, 8.0, 1.0 / 1024);
  const auto f = random_function(g, LatticeSpec::scalar(), rng);
  const auto k = Kernel::sample(ClosedForm::gaussian(0.1), 1, g.step, 1024);
  const auto a = convolve(k, f, ConvolutionMethod::Direct);
  const auto b = convolve(k, f, ConvolutionMethod::FFT);
  CHECK((a.values() - b.values()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("linearity") {
  Rng rng(8);
  const auto g = Grid::line(0.0, 1.0, 1.0 / 64);
  const auto spec = LatticeSpec::parse("l2(2)");
  const auto f = random_function(g, spec, rng), h = random_function(g, spec, rng);
  const auto k = random_kernel(1, g.step, 20, rng);
  const GridFunction combo(g, spec, CellMatrix(2.0 * f.values() - 0.5 * h.values()));
  const CellMatrix lhs = convolve(k, combo).values();
  const CellMatrix rhs = 2.0 * convolve(k, f).values() - 0.5 * convolve(k, h).values();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("positivity and Young") {
  Rng rng(12);
  const auto g = Grid::line(-1.0, 1.0, 1.0 / 128);
  const auto k = Kernel::sample(ClosedForm::exponential(3.0), 1, g.step, 2048);
  CellMatrix v = random_function(g, LatticeSpec::parse("l2(2)"), rng).values().cwiseAbs();
  const GridFunction f(g, LatticeSpec::parse("l2(2)"), v);
  const auto kf = convolve(k, f);
  CHECK(kf.values().minCoeff() >= 0.0);
  const double l1 = k.samples().cwiseAbs().sum() * g.step;
  for (double p : {1.0, 2.0, 5.0}) CHECK(lp_norm(kf, p) <= l1 * lp_norm(f, p) * (1 + 1e-12));
}

TEST_CASE("adjoint kernel") {
  const double h = 1.0 / 16;
  const auto even = Kernel::sample(ClosedForm::gaussian(0.3), 1, h, 20);
  CHECK(adjoint_kernel(even).samples().isApprox(even.samples()));
  const auto ind = Kernel::sample(ClosedForm::indicator(0.0, 1.0), 1, h, 20);
  const auto refl = adjoint_kernel(ind);
  for (Index m = -20; m <= 20; ++m) CHECK(refl.at(m) == ind.at(-m));

  Rng rng(17);
  for (int d : {1, 2}) {
    const auto g = d == 1 ? Grid::line(0.0, 2.0, h) : Grid::square(0.0, 1.0, h);
    const auto spec = LatticeSpec::parse("l2(2)");
    const auto f = random_function(g, spec, rng), w = random_function(g, spec, rng);
    const auto k = random_kernel(d, h, 9, rng);
    const double lhs = pairing(convolve(k, f), w);
    const double rhs = pairing(f, convolve(adjoint_kernel(k), w));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("incompatible steps are rejected") {
  const auto g = Grid::line(0.0, 1.0, 1.0 / 16);
  const GridFunction f(g, LatticeSpec::scalar());
  CHECK_THROWS_AS(convolve(Kernel::dirac(1, 1.0 / 32), f), DimensionMismatch);
}

TEST_CASE("serialisation") {
  Rng rng(30);
  const auto g = Grid::square(-1.0, 1.0, 0.25);
  const auto f = random_function(g, LatticeSpec::parse("linf(2,l1.5(2))"), rng);
  std::stringstream bin;
  write_binary(bin, f);
  const auto back = read_binary(bin);
  CHECK(back.grid() == f.grid());
  CHECK(back.spec() == f.spec());
  CHECK(back.values() == f.values());

  std::stringstream bad("not a grid function");
  CHECK_THROWS(read_binary(bad));

  std::ostringstream csv;
  write_csv(csv, f);
  const std::string text = csv.str();
  Index lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == g.cells() + 1);
  CHECK(text.rfind("cell,x,y,c0,c1,c2,c3", 0) == 0);
}
