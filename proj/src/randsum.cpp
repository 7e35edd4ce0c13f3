#include "rlab/randsum.hpp"

#include <bit>
#include <cmath>
#include <vector>

#include "rlab/defaults.hpp"
#include "rlab/errors.hpp"
#include "rlab/parallel.hpp"
#include "rlab/rng.hpp"

namespace rlab {

std::string to_string(SumMethod m) {
  return m == SumMethod::ExactEnumeration ? "exact-enumeration" : "monte-carlo";
}

namespace {

constexpr Index kBlock = 4096;

struct Resolved {
  Index samples;
  std::uint64_t seed;
  Index exact_max;
};

Resolved resolve(const SumOptions& o) {
  return {o.mc_samples > 0 ? o.mc_samples : defaults().mc_samples, o.seed != 0 ? o.seed : defaults().seed,
          o.exact_max >= 0 ? o.exact_max : defaults().exact_max_terms};
}

double checked_p(const Exponent& p) {
  if (p.is_infinite()) throw InvalidArgument("random sum moments need a finite exponent");
  return p.value();
}

double pow_norm(const LatticeSpec& spec, const Eigen::VectorXd& s, double p) {
  const double n = norm(spec, s);
  return p == 2.0 ? n * n : std::pow(n, p);
}

Eigen::MatrixXd as_columns(std::span<const LatticeVec> xs) {
  if (xs.empty()) throw InvalidArgument("random sum of an empty family");
  Eigen::MatrixXd cols(xs[0].spec.total_dim(), static_cast<Index>(xs.size()));
  for (size_t n = 0; n < xs.size(); ++n) {
    if (!(xs[n].spec == xs[0].spec)) throw DimensionMismatch("random sum over different specs");
    cols.col(static_cast<Index>(n)) = xs[n].coords;
  }
  return cols;
}

/// Monte Carlo moment of ||sum_n w_n x_n||^p with per-block streams merged in order.
template <class Draw>
SumEstimate monte_carlo(const LatticeSpec& spec, const Eigen::MatrixXd& cols, double p, const Resolved& r,
                        std::uint64_t stream, Draw draw) {
  const Index blocks = (r.samples + kBlock - 1) / kBlock;
  std::vector<double> sum(static_cast<size_t>(blocks)), sum_sq(static_cast<size_t>(blocks));
  parallel_for(blocks, [&](Index b) {
    Rng rng(derive_seed(r.seed, stream, static_cast<std::uint64_t>(b)));
    const Index count = std::min(kBlock, r.samples - b * kBlock);
    Eigen::VectorXd w(cols.cols()), s(cols.rows());
    double a = 0.0, a2 = 0.0;
    for (Index i = 0; i < count; ++i) {
      for (Index n = 0; n < w.size(); ++n) w[n] = draw(rng);
      s.noalias() = cols * w;
      const double v = pow_norm(spec, s, p);
      a += v;
      a2 += v * v;
    }
    sum[static_cast<size_t>(b)] = a;
    sum_sq[static_cast<size_t>(b)] = a2;
  });
  double a = 0.0, a2 = 0.0;
  for (Index b = 0; b < blocks; ++b) {
    a += sum[static_cast<size_t>(b)];
    a2 += sum_sq[static_cast<size_t>(b)];
  }
  const double n = static_cast<double>(r.samples);
  const double mean = a / n;
  const double var = std::max(0.0, (a2 / n - mean * mean) * n / std::max(1.0, n - 1.0));
  SumEstimate est;
  est.method = SumMethod::MonteCarlo;
  est.samples = r.samples;
  est.value = std::pow(mean, 1.0 / p);
  // Delta method for the p-th root of the sample mean.
  est.std_error = mean > 0 ? est.value / (p * mean) * std::sqrt(var / n) : 0.0;
  return est;
}

}  // namespace

SumEstimate rademacher_sum_Lp(const LatticeSpec& spec, const Eigen::MatrixXd& cols, const Exponent& pe,
                              const SumOptions& opt) {
  const double p = checked_p(pe);
  if (cols.rows() != spec.total_dim()) throw DimensionMismatch("random sum vectors do not match the lattice dimension");
  const Resolved r = resolve(opt);
  const Index n = cols.cols();
  if (n == 0) throw InvalidArgument("random sum of an empty family");
  if (n > r.exact_max) return monte_carlo(spec, cols, p, r, 1, [](Rng& g) { return g.rademacher(); });

  // Sign patterns r and -r give the same norm, so fix r_0 = +1 and walk a Gray code.
  Eigen::VectorXd s = cols.rowwise().sum();
  std::vector<double> sign(static_cast<size_t>(n), 1.0);
  const std::uint64_t patterns = std::uint64_t(1) << (n - 1);
  double total = pow_norm(spec, s, p);
  for (std::uint64_t g = 1; g < patterns; ++g) {
    const auto bit = static_cast<Index>(std::countr_zero(g)) + 1;
    sign[static_cast<size_t>(bit)] = -sign[static_cast<size_t>(bit)];
    s += 2.0 * sign[static_cast<size_t>(bit)] * cols.col(bit);
    total += pow_norm(spec, s, p);
  }
  SumEstimate est;
  est.method = SumMethod::ExactEnumeration;
  est.samples = static_cast<Index>(patterns);
  est.value = std::pow(total / static_cast<double>(patterns), 1.0 / p);
  return est;
}

SumEstimate gaussian_sum_Lp(const LatticeSpec& spec, const Eigen::MatrixXd& cols, const Exponent& pe,
                            const SumOptions& opt) {
  const double p = checked_p(pe);
  if (cols.rows() != spec.total_dim()) throw DimensionMismatch("random sum vectors do not match the lattice dimension");
  if (cols.cols() == 0) throw InvalidArgument("random sum of an empty family");
  return monte_carlo(spec, cols, p, resolve(opt), 2, [](Rng& g) { return g.normal(); });
}

SumEstimate rademacher_sum_Lp(std::span<const LatticeVec> xs, const Exponent& p, const SumOptions& opt) {
  const Eigen::MatrixXd cols = as_columns(xs);
  return rademacher_sum_Lp(xs[0].spec, cols, p, opt);
}

SumEstimate gaussian_sum_Lp(std::span<const LatticeVec> xs, const Exponent& p, const SumOptions& opt) {
  const Eigen::MatrixXd cols = as_columns(xs);
  return gaussian_sum_Lp(xs[0].spec, cols, p, opt);
}

double square_function_norm(std::span<const GridFunction> gs) {
  if (gs.empty()) throw InvalidArgument("square function of an empty family");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(gs[0].dim());
  for (const auto& g : gs) {
    if (!(g.grid() == gs[0].grid()) || !(g.spec() == gs[0].spec()))
      throw DimensionMismatch("square function over mismatched grids or specs");
    acc += g.grid().cell_volume() * g.values().array().square().colwise().sum().matrix().transpose();
  }
  return norm(gs[0].spec(), acc.cwiseSqrt());
}

SumEstimate gamma_norm_mc(std::span<const GridFunction> gs, const SumOptions& opt) {
  if (gs.empty()) throw InvalidArgument("gamma norm of an empty family");
  const Index cells = gs[0].cells(), m = gs[0].dim();
  Eigen::MatrixXd cols(m, cells * static_cast<Index>(gs.size()));
  for (size_t n = 0; n < gs.size(); ++n) {
    if (!(gs[n].grid() == gs[0].grid()) || !(gs[n].spec() == gs[0].spec()))
      throw DimensionMismatch("gamma norm over mismatched grids or specs");
    cols.middleCols(static_cast<Index>(n) * cells, cells) =
        std::sqrt(gs[n].grid().cell_volume()) * gs[n].values().transpose();
  }
  return gaussian_sum_Lp(gs[0].spec(), cols, Exponent(2.0), opt);
}

double type2_constant_probe(const LatticeSpec& spec, Index trials, std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("type-2 probe needs at least one trial");
  const Index dim = spec.total_dim();
  double best = 0.0;
  for (Index t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, 3, static_cast<std::uint64_t>(t)));
    const Index n = 2 + rng.below(7);
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(dim, n);
    switch (t % 3) {
      case 0:  // dense Gaussian vectors
        for (Index j = 0; j < n; ++j)
          for (Index i = 0; i < dim; ++i) cols(i, j) = rng.normal();
        break;
      case 1:  // disjoint unit vectors
        for (Index j = 0; j < n; ++j) cols(j % dim, j) = 1.0;
        break;
      default:  // sparse vectors with a few random entries
        for (Index j = 0; j < n; ++j)
          for (int e = 0; e < 3; ++e) cols(rng.below(dim), j) = rng.normal();
        break;
    }
    double den = 0.0;
    for (Index j = 0; j < n; ++j) den += std::pow(norm(spec, cols.col(j)), 2);
    if (den == 0.0) continue;
    const double num = rademacher_sum_Lp(spec, cols, Exponent(2.0), {0, seed, 14}).value;
    best = std::max(best, num / std::sqrt(den));
  }
  return best;
}

}  // namespace rlab
