#include "rlab/stochconv.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "rlab/errors.hpp"
#include "rlab/parallel.hpp"
#include "rlab/quadrature.hpp"
#include "rlab/randsum.hpp"
#include "rlab/rng.hpp"

namespace rlab {

namespace {

constexpr std::uint64_t kPathStream = 300;
constexpr std::uint64_t kPairingStream = 301;
constexpr std::uint64_t kBurkholderStream = 302;

void check_integrand(const Kernel& k, std::span<const GridFunction> G) {
  if (G.empty()) throw InvalidArgument("the integrand needs at least one H-direction");
  const Grid& g = G[0].grid();
  if (g.dim != 1) throw InvalidArgument("stochastic convolutions are one-dimensional in time");
  if (k.dim() != 1) throw InvalidArgument("the kernel must be one-dimensional");
  for (const auto& f : G)
    if (!(f.grid() == g) || !(f.spec() == G[0].spec()))
      throw DimensionMismatch("every H-direction needs the same grid and lattice");
  if (std::abs(k.step() - g.step) > 1e-12 * g.step)
    throw InvalidArgument("the kernel step differs from the time grid step");
}

/// Row j: sum over directions of G_eta(j) dW_eta(j).
CellMatrix driven_increments(std::span<const GridFunction> G, const BrownianPath& path, Index steps) {
  CellMatrix out = CellMatrix::Zero(steps, G[0].dim());
  for (size_t eta = 0; eta < G.size(); ++eta)
    for (Index j = 0; j < steps; ++j)
      out.row(j) += path.increments(j, static_cast<Index>(eta)) * G[eta].values().row(j);
  return out;
}

void check_path(std::span<const GridFunction> G, const BrownianPath& path, Index steps) {
  if (std::abs(path.dt - G[0].grid().step) > 1e-12 * G[0].grid().step)
    throw InvalidArgument("time step of the path differs from the kernel grid");
  if (path.h_dim != static_cast<Index>(G.size()))
    throw DimensionMismatch("path dimension differs from the number of H-directions");
  if (path.steps() < steps) throw DimensionMismatch("path is shorter than the requested horizon");
}

struct Moments {
  double m1 = 0, m2 = 0, m4 = 0;
};

}  // namespace

BrownianPath BrownianPath::generate(Index steps, Index h_dim, double dt, std::uint64_t seed) {
  if (steps < 0 || h_dim < 1 || !(dt > 0)) throw InvalidArgument("invalid Brownian path shape");
  BrownianPath p{dt, h_dim, Eigen::MatrixXd(steps, h_dim), seed};
  Rng rng(seed);
  const double sd = std::sqrt(dt);
  for (Index j = 0; j < steps; ++j)
    for (Index e = 0; e < h_dim; ++e) p.increments(j, e) = sd * rng.normal();
  return p;
}

CellMatrix stochastic_convolution(const Kernel& k, std::span<const GridFunction> G, const BrownianPath& path) {
  check_integrand(k, G);
  const Index cells = G[0].cells();
  check_path(G, path, cells);
  const CellMatrix dz = driven_increments(G, path, cells);
  CellMatrix out = CellMatrix::Zero(cells + 1, G[0].dim());
  for (Index i = 1; i <= cells; ++i)
    for (Index j = std::max<Index>(0, i - k.radius()); j < i; ++j) out.row(i) += k.at(i - j) * dz.row(j);
  return out;
}

Eigen::RowVectorXd stochastic_convolution_at(const Kernel& k, std::span<const GridFunction> G,
                                             const BrownianPath& path, Index node) {
  check_integrand(k, G);
  if (node < 0 || node > G[0].cells()) throw InvalidArgument("node outside the time grid");
  check_path(G, path, node);
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(G[0].dim());
  for (Index j = std::max<Index>(0, node - k.radius()); j < node; ++j) {
    const double kv = k.at(node - j);
    for (size_t eta = 0; eta < G.size(); ++eta)
      out += kv * path.increments(j, static_cast<Index>(eta)) * G[eta].values().row(j);
  }
  return out;
}

Eigen::VectorXd ito_variance_discrete(const Kernel& k, std::span<const GridFunction> G, Index node) {
  check_integrand(k, G);
  const double h = G[0].grid().step;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(G[0].dim());
  for (Index j = 0; j < node; ++j) {
    const double kv = k.at(node - j);
    for (const auto& g : G) out += (kv * kv * h) * g.values().row(j).transpose().cwiseAbs2();
  }
  return out;
}

Eigen::VectorXd ito_variance(const Kernel& k, std::span<const GridFunction> G, Index node) {
  if (!k.closed_form()) return ito_variance_discrete(k, G, node);
  check_integrand(k, G);
  const ClosedForm& form = *k.closed_form();
  const double h = G[0].grid().step;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(G[0].dim());
  for (Index j = 0; j < node; ++j) {
    // Over cell j the lag t_i - s runs through [(i-j-1)h, (i-j)h].
    const double a = static_cast<double>(node - j - 1) * h, b = a + h;
    const double w = adaptive_simpson(
        [&](double u) {
          const double v = form.eval(u);
          return v * v;
        },
        a, b, 1e-14);
    for (const auto& g : G) out += w * g.values().row(j).transpose().cwiseAbs2();
  }
  return out;
}

bool ItoReport::passed() const {
  if (coords.empty()) return false;
  for (const auto& c : coords)
    if (!c.variance_ok || !c.mean_ok) return false;
  return true;
}

ItoReport ito_check(const Kernel& k, std::span<const GridFunction> G, Index node, Index paths, std::uint64_t seed) {
  check_integrand(k, G);
  if (paths < 2) throw InvalidArgument("the isometry check needs at least two paths");
  const Index dim = G[0].dim(), hdim = static_cast<Index>(G.size());
  Eigen::MatrixXd samples(paths, dim);
  parallel_for(paths, [&](Index p) {
    const auto path = BrownianPath::generate(node, hdim, G[0].grid().step, derive_seed(seed, kPathStream, p));
    samples.row(p) = stochastic_convolution_at(k, G, path, node);
  });
  ItoReport rep;
  rep.paths = paths;
  rep.node = node;
  const Eigen::VectorXd analytic = ito_variance(k, G, node);
  const Eigen::VectorXd discrete = ito_variance_discrete(k, G, node);
  const double n = static_cast<double>(paths);
  for (Index c = 0; c < dim; ++c) {
    Moments m;
    for (Index p = 0; p < paths; ++p) {
      const double x = samples(p, c), x2 = x * x;
      m.m1 += x;
      m.m2 += x2;
      m.m4 += x2 * x2;
    }
    m.m1 /= n;
    m.m2 /= n;
    m.m4 /= n;
    ItoCoordinate ic;
    ic.coord = c;
    ic.variance = m.m2;  // the mean is known to vanish
    ic.std_error = std::sqrt(std::max(0.0, m.m4 - m.m2 * m.m2) / n);
    ic.analytic = analytic[c];
    ic.discrete = discrete[c];
    ic.mean = m.m1;
    ic.mean_error = std::sqrt(std::max(0.0, m.m2 - m.m1 * m.m1) / n);
    ic.variance_ok = std::abs(ic.variance - ic.analytic) <= 3.0 * ic.std_error;
    ic.mean_ok = std::abs(ic.mean) <= 3.0 * ic.mean_error;
    rep.coords.push_back(ic);
  }
  return rep;
}

bool CovarianceCheck::passed() const { return std::abs(covariance - exact) <= 3.0 * std_error; }

CovarianceCheck wiener_covariance(const Eigen::MatrixXd& f, const Eigen::MatrixXd& g, double dt, Index paths,
                                  std::uint64_t seed) {
  if (f.rows() != g.rows() || f.cols() != g.cols()) throw DimensionMismatch("f and g need the same shape");
  if (paths < 2) throw InvalidArgument("the covariance check needs at least two paths");
  Eigen::MatrixXd xy(paths, 2);
  parallel_for(paths, [&](Index p) {
    const auto path = BrownianPath::generate(f.rows(), f.cols(), dt, derive_seed(seed, kPairingStream, p));
    xy(p, 0) = f.cwiseProduct(path.increments).sum();
    xy(p, 1) = g.cwiseProduct(path.increments).sum();
  });
  const double n = static_cast<double>(paths);
  const Eigen::Vector2d mean = xy.colwise().mean();
  const Eigen::VectorXd x = xy.col(0).array() - mean[0], y = xy.col(1).array() - mean[1];
  const Eigen::VectorXd prod = x.cwiseProduct(y);
  CovarianceCheck c;
  c.covariance = prod.sum() / (n - 1.0);
  c.std_error = std::sqrt((prod.array() - prod.mean()).square().sum() / (n - 1.0) / n);
  c.exact = f.cwiseProduct(g).sum() * dt;
  const double sx = x.norm(), sy = y.norm();
  c.correlation = sx > 0 && sy > 0 ? x.dot(y) / (sx * sy) : 0.0;
  return c;
}

bool MomentComparison::passed() const {
  return std::abs(path_value - gaussian_value) <= 3.0 * std::hypot(path_error, gaussian_error);
}

MomentComparison l2_moment_comparison(const Kernel& k, std::span<const GridFunction> G, Index node, Index paths,
                                      std::uint64_t seed) {
  check_integrand(k, G);
  const LatticeSpec& spec = G[0].spec();
  const Index hdim = static_cast<Index>(G.size());
  Eigen::VectorXd sq(paths);
  parallel_for(paths, [&](Index p) {
    const auto path = BrownianPath::generate(node, hdim, G[0].grid().step, derive_seed(seed, kPathStream, p));
    const Eigen::RowVectorXd s = stochastic_convolution_at(k, G, path, node);
    const double v = norm(spec, std::span<const double>(s.data(), static_cast<size_t>(s.size())));
    sq[p] = v * v;
  });
  MomentComparison out;
  const double n = static_cast<double>(paths), m2 = sq.mean();
  const double var = (sq.array() - m2).square().sum() / (n - 1.0);
  out.path_value = std::sqrt(m2);
  out.path_error = m2 > 0 ? std::sqrt(var / n) / (2.0 * out.path_value) : 0.0;

  // Columns sqrt(h) k(t - s_j) G_eta(s_j): one independent Gaussian per (cell, direction).
  const double sh = std::sqrt(G[0].grid().step);
  Eigen::MatrixXd cols(G[0].dim(), node * hdim);
  for (Index j = 0; j < node; ++j)
    for (Index e = 0; e < hdim; ++e)
      cols.col(j * hdim + e) = sh * k.at(node - j) * G[static_cast<size_t>(e)].values().row(j).transpose();
  SumOptions opt;
  opt.mc_samples = paths;
  opt.seed = derive_seed(seed, kPathStream + 10);
  const SumEstimate gs = gaussian_sum_Lp(spec, cols, Exponent(2.0), opt);
  out.gaussian_value = gs.value;
  out.gaussian_error = gs.std_error;
  return out;
}

BurkholderProbe burkholder_probe(const GridFunction& G, double p, Index paths, std::uint64_t seed) {
  if (G.dim() != 1 || G.grid().dim != 1) throw InvalidArgument("the Burkholder probe takes scalar functions of time");
  if (!(p >= 1)) throw InvalidArgument("the moment exponent must be at least one");
  const Index cells = G.cells();
  const double h = G.grid().step;
  Eigen::VectorXd moments(paths);
  parallel_for(paths, [&](Index i) {
    const auto path = BrownianPath::generate(cells, 1, h, derive_seed(seed, kBurkholderStream, i));
    double s = 0.0, sup = 0.0;
    for (Index j = 0; j < cells; ++j) {
      s += G.values()(j, 0) * path.increments(j, 0);
      sup = std::max(sup, std::abs(s));
    }
    moments[i] = std::pow(sup, p);
  });
  BurkholderProbe out;
  out.moment = std::pow(moments.mean(), 1.0 / p);
  out.l2_norm = std::sqrt(G.values().squaredNorm() * h);
  out.ratio = out.l2_norm > 0 ? out.moment / out.l2_norm : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// N_k

NkImage::NkImage(Kernel k, GridFunction G) : k_(std::move(k)), G_(std::move(G)) {
  if (G_.grid().dim != 1 || k_.dim() != 1) throw InvalidArgument("N_k is implemented on the line");
}

GridFunction NkImage::at(Index t) const {
  if (t < 0 || t >= times()) throw InvalidArgument("time index outside the grid");
  CellMatrix v = G_.values();
  for (Index j = 0; j < v.rows(); ++j) v.row(j) *= k_.at(t - j);
  return GridFunction(G_.grid(), G_.spec(), std::move(v));
}

NkApplication apply_Nk(const Kernel& k, const GridFunction& G, const Exponent& p) {
  if (p.is_infinite() || p.value() < 2.0) throw InvalidArgument("N_k is applied on L^p with 2 <= p < inf");
  NkImage image(k, G);
  // int |k(t-s) G(s)|^2 ds = (k^2 * |G|^2)(t) coordinatewise.
  const GridFunction g2(G.grid(), G.spec(), G.values().cwiseAbs2());
  CellMatrix sq = convolve(k.squared(), g2).values().cwiseMax(0.0).cwiseSqrt();
  const double n = lp_norm(GridFunction(G.grid(), G.spec(), std::move(sq)), p);
  return {std::move(image), n};
}

NkRatio::NkRatio(std::vector<Kernel> kernels, SpaceSpec space) : kernels_(std::move(kernels)), space_(std::move(space)) {
  if (kernels_.empty()) throw InvalidArgument("empty kernel family");
  if (space_.p.is_infinite() || space_.p.value() < 2.0) throw InvalidArgument("N_k needs 2 <= p < inf");
  if (static_cast<Index>(kernels_.size()) > 14) throw InvalidArgument("N_k families are enumerated up to 14 members");
  const Index n = members();
  for (Index a = 0; a < n; ++a) {
    for (Index b = a; b < n; ++b) {
      const Kernel& ka = kernels_[static_cast<size_t>(a)];
      const Kernel& kb = kernels_[static_cast<size_t>(b)];
      const Index r = std::min(ka.radius(), kb.radius());
      Eigen::VectorXd s(2 * r + 1);
      for (Index m = -r; m <= r; ++m) s[m + r] = ka.at(m) * kb.at(m);
      products_.push_back(Kernel::from_samples(std::move(s), 1, ka.step(), r, 0.0, "product"));
    }
  }
}

Index NkRatio::pair_index(Index n, Index m) const {
  if (n > m) std::swap(n, m);
  const Index N = members();
  return n * N - n * (n - 1) / 2 + (m - n);
}

CellMatrix NkRatio::cross(Index n, Index m, const CellMatrix& a, const CellMatrix& b) const {
  const GridFunction prod(space_.grid, space_.spec, a.cwiseProduct(b));
  return convolve(products_[static_cast<size_t>(pair_index(n, m))], prod).values();
}

double NkRatio::value(const std::vector<const CellMatrix*>& f, const std::vector<const CellMatrix*>& c) const {
  const Index N = members();
  const double vol = space_.grid.cell_volume();
  const Exponent& p = space_.p;
  const LatticeSpec& spec = space_.spec;
  auto lp_sq = [&](const CellMatrix& v) {
    Eigen::VectorXd norms(v.rows());
    for (Index r = 0; r < v.rows(); ++r)
      norms[r] = norm(spec, std::span<const double>(v.row(r).data(), static_cast<size_t>(v.cols())));
    const double x = lp_of_cell_norms(norms, vol, p);
    return x * x;
  };
  std::vector<double> sign(static_cast<size_t>(N), 1.0);
  const std::uint64_t patterns = std::uint64_t(1) << (N - 1);
  double num = 0.0, den = 0.0;
  CellMatrix sum = *f[0];
  for (Index i = 1; i < N; ++i) sum += *f[static_cast<size_t>(i)];
  CellMatrix q;
  for (std::uint64_t g = 0; g < patterns; ++g) {
    if (g > 0) {
      const auto bit = static_cast<size_t>(std::countr_zero(g)) + 1;
      sign[bit] = -sign[bit];
      sum += 2.0 * sign[bit] * *f[bit];
    }
    den += lp_sq(sum);
    q = CellMatrix::Zero(sum.rows(), sum.cols());
    for (Index a = 0; a < N; ++a)
      for (Index b = a; b < N; ++b) {
        const double w = (a == b ? 1.0 : 2.0) * sign[static_cast<size_t>(a)] * sign[static_cast<size_t>(b)];
        q += w * *c[static_cast<size_t>(pair_index(a, b))];
      }
    num += lp_sq(q.cwiseMax(0.0).cwiseSqrt());
  }
  if (!(den > 0)) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(num / den);
}

double NkRatio::reset(const std::vector<CellMatrix>& w) {
  if (static_cast<Index>(w.size()) != members()) throw DimensionMismatch("witness size differs from family size");
  f_ = w;
  const Index N = members();
  c_.assign(static_cast<size_t>(N * (N + 1) / 2), CellMatrix());
  for (Index a = 0; a < N; ++a)
    for (Index b = a; b < N; ++b)
      c_[static_cast<size_t>(pair_index(a, b))] = cross(a, b, f_[static_cast<size_t>(a)], f_[static_cast<size_t>(b)]);
  std::vector<const CellMatrix*> fp, cp;
  for (auto& x : f_) fp.push_back(&x);
  for (auto& x : c_) cp.push_back(&x);
  return value(fp, cp);
}

double NkRatio::propose(std::span<const std::pair<Index, CellMatrix>> changes) {
  const Index N = members();
  pending_idx_.clear();
  pending_f_.clear();
  pending_c_.clear();
  pending_pairs_.clear();
  std::vector<const CellMatrix*> fp, cp;
  for (auto& x : f_) fp.push_back(&x);
  pending_f_.reserve(changes.size());
  for (const auto& [n, v] : changes) {
    pending_idx_.push_back(n);
    pending_f_.push_back(v);
  }
  for (size_t i = 0; i < pending_idx_.size(); ++i) fp[static_cast<size_t>(pending_idx_[i])] = &pending_f_[i];
  for (auto& x : c_) cp.push_back(&x);
  std::vector<bool> touched(static_cast<size_t>(N), false);
  for (Index n : pending_idx_) touched[static_cast<size_t>(n)] = true;
  pending_c_.reserve(c_.size());
  for (Index a = 0; a < N; ++a)
    for (Index b = a; b < N; ++b)
      if (touched[static_cast<size_t>(a)] || touched[static_cast<size_t>(b)]) {
        pending_pairs_.push_back(pair_index(a, b));
        pending_c_.push_back(cross(a, b, *fp[static_cast<size_t>(a)], *fp[static_cast<size_t>(b)]));
      }
  for (size_t i = 0; i < pending_pairs_.size(); ++i) cp[static_cast<size_t>(pending_pairs_[i])] = &pending_c_[i];
  return value(fp, cp);
}

void NkRatio::commit() {
  for (size_t i = 0; i < pending_idx_.size(); ++i)
    f_[static_cast<size_t>(pending_idx_[i])] = std::move(pending_f_[i]);
  for (size_t i = 0; i < pending_pairs_.size(); ++i)
    c_[static_cast<size_t>(pending_pairs_[i])] = std::move(pending_c_[i]);
  pending_idx_.clear();
  pending_pairs_.clear();
}

double concavification_identity_deviation(std::span<const Kernel> kernels, std::span<const GridFunction> G) {
  if (kernels.size() != G.size() || G.empty()) throw DimensionMismatch("one integrand per kernel is required");
  const GridFunction& g0 = G[0];
  const LatticeSpec& spec = g0.spec();
  const LatticeSpec spec2 = spec.concavify(2.0);
  const Index times = g0.cells();

  // Right-hand side through the library convolution on |G_n|^2.
  CellMatrix sum = CellMatrix::Zero(times, g0.dim());
  for (size_t n = 0; n < G.size(); ++n) {
    const GridFunction f(g0.grid(), spec, G[n].values().cwiseAbs2());
    sum += convolve(kernels[n].squared(), f).values();
  }
  std::vector<NkImage> images;
  for (size_t n = 0; n < G.size(); ++n) images.emplace_back(kernels[n], G[n]);

  Eigen::VectorXd dev(times);
  parallel_for(times, [&](Index t) {
    std::vector<GridFunction> at;
    for (const auto& im : images) at.push_back(im.at(t));
    const double lhs = square_function_norm(at);
    const Eigen::RowVectorXd row = sum.row(t).cwiseMax(0.0);
    const double rhs = std::sqrt(norm(spec2, std::span<const double>(row.data(), static_cast<size_t>(row.size()))));
    dev[t] = std::abs(lhs - rhs) / std::max(1.0, rhs);
  });
  return dev.maxCoeff();
}

EquivalenceReport equivalence_experiment(std::span<const Kernel> kernels, const SpaceSpec& space,
                                         const SearchOptions& opt) {
  for (const auto& l : space.spec.levels())
    if (l.q.is_finite() && l.q.value() < 2.0)
      throw InvalidArgument("the lattice " + space.spec.to_string() + " is not 2-convex");
  std::vector<Kernel> ks(kernels.begin(), kernels.end());
  EquivalenceReport rep;
  const OperatorFamily squared(ks, space, Flavor::SquaredKernel);
  rep.B_estimate = estimate_ls_bound(squared, Exponent(1.0), opt);
  rep.B = rep.B_estimate.value;
  rep.sqrtB = std::sqrt(rep.B);

  // The l^1 witness f_n corresponds to the integrands G_n = |f_n|^(1/2).
  std::vector<GridFunction> seed;
  for (const auto& w : rep.B_estimate.witness)
    seed.emplace_back(space.grid, space.spec, w.f.values().cwiseAbs().cwiseSqrt());
  SearchOptions aopt = opt;
  aopt.seeds.insert(aopt.seeds.begin(), seed);
  rep.A_estimate = maximize_ratio(NkRatio(ks, space), aopt);
  rep.A = rep.A_estimate.value;
  rep.ratio = rep.A / rep.sqrtB;
  rep.identity_deviation = concavification_identity_deviation(ks, seed);
  return rep;
}

}  // namespace rlab
