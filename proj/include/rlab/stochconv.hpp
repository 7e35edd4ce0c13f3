#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "rlab/family.hpp"
#include "rlab/rbound.hpp"

namespace rlab {

/// Increments of an hDim-dimensional Brownian motion on a uniform time grid.
struct BrownianPath {
  double dt = 0.0;
  Index h_dim = 1;
  Eigen::MatrixXd increments;  // steps x h_dim, N(0, dt) entries
  std::uint64_t seed = 0;

  static BrownianPath generate(Index steps, Index h_dim, double dt, std::uint64_t seed);
  Index steps() const { return increments.rows(); }
};

/// Left-point sums S(t_i) = sum_{j<i} k((i-j)h) sum_eta G_eta(t_j) dW_eta(j) on
/// the nodes t_i = origin + i h, i = 0..cells. G holds one function per
/// direction of H on a common one-dimensional grid. Returns (cells+1) x dim.
CellMatrix stochastic_convolution(const Kernel& k, std::span<const GridFunction> G, const BrownianPath& path);
/// Only the value at node i.
Eigen::RowVectorXd stochastic_convolution_at(const Kernel& k, std::span<const GridFunction> G,
                                             const BrownianPath& path, Index node);

/// int_0^{t_i} k^2(t_i - s) |G(s)|_H^2 ds per lattice coordinate, integrating
/// the closed form of k exactly over each cell (the sampled sum without one).
Eigen::VectorXd ito_variance(const Kernel& k, std::span<const GridFunction> G, Index node);
/// The same quantity for the sampled kernel: sum_j k((i-j)h)^2 |G_j|^2 h.
Eigen::VectorXd ito_variance_discrete(const Kernel& k, std::span<const GridFunction> G, Index node);

struct ItoCoordinate {
  Index coord = 0;
  double variance = 0.0;   // Monte Carlo E S^2
  double std_error = 0.0;  // from the fourth moment
  double analytic = 0.0;
  double discrete = 0.0;
  double mean = 0.0;
  double mean_error = 0.0;
  bool variance_ok = false;  // |variance - analytic| <= 3 std_error
  bool mean_ok = false;      // |mean| <= 3 mean_error
};

struct ItoReport {
  Index paths = 0;
  Index node = 0;
  std::vector<ItoCoordinate> coords;
  bool passed() const;
};

/// Monte Carlo check of the isometry at one node with per-path seeds derived
/// from (seed, path index).
ItoReport ito_check(const Kernel& k, std::span<const GridFunction> G, Index node, Index paths, std::uint64_t seed);

struct CovarianceCheck {
  double covariance = 0.0;
  double std_error = 0.0;
  double exact = 0.0;  // <f, g> in L^2(R_+; H)
  double correlation = 0.0;
  bool passed() const;
};

/// Sample covariance of W_H f and W_H g, for f, g given as (steps x h_dim)
/// step functions of time.
CovarianceCheck wiener_covariance(const Eigen::MatrixXd& f, const Eigen::MatrixXd& g, double dt, Index paths,
                                  std::uint64_t seed);

struct MomentComparison {
  double path_value = 0.0;  // (E ||S(t)||_X^2)^(1/2) from stochastic convolutions
  double path_error = 0.0;
  double gaussian_value = 0.0;  // Gaussian sum of s -> k(t-s) G(s)
  double gaussian_error = 0.0;
  bool passed() const;
};

MomentComparison l2_moment_comparison(const Kernel& k, std::span<const GridFunction> G, Index node, Index paths,
                                      std::uint64_t seed);

struct BurkholderProbe {
  double moment = 0.0;   // (E sup_t |S(t)|^p)^(1/p) for the flat kernel
  double l2_norm = 0.0;  // ||G||_{L^2}
  double ratio = 0.0;
};

/// Scalar G; the flat kernel turns S into the martingale int_0^t G dW.
BurkholderProbe burkholder_probe(const GridFunction& G, double p, Index paths, std::uint64_t seed);

/// (N_k G)(t) = k(t - .) G(.) for every cell t, built on demand.
class NkImage {
 public:
  NkImage(Kernel k, GridFunction G);
  Index times() const { return G_.cells(); }
  const Grid& grid() const { return G_.grid(); }
  /// The function s -> k(t - s) G(s) for t the centre of cell `t`.
  GridFunction at(Index t) const;
  const Kernel& kernel() const { return k_; }
  const GridFunction& integrand() const { return G_; }

 private:
  Kernel k_;
  GridFunction G_;
};

struct NkApplication {
  NkImage image;
  double norm = 0.0;  // || t -> ||(int |k(t-s) G(s)|^2 ds)^(1/2)||_X ||_{L^p}
};

/// Throws InvalidArgument for p < 2.
NkApplication apply_Nk(const Kernel& k, const GridFunction& G, const Exponent& p);

/// R-ratio of the family {N_k} on L^p(grid; X): the image norm of sum r_n N_{k_n} G_n
/// is computed from the cross terms (k_n k_m) * (G_n G_m).
class NkRatio : public RatioObjective {
 public:
  NkRatio(std::vector<Kernel> kernels, SpaceSpec space);
  Index members() const override { return static_cast<Index>(kernels_.size()); }
  const Grid& grid() const override { return space_.grid; }
  const LatticeSpec& member_spec() const override { return space_.spec; }
  double reset(const std::vector<CellMatrix>& w) override;
  double propose(std::span<const std::pair<Index, CellMatrix>> changes) override;
  void commit() override;
  std::unique_ptr<RatioObjective> clone() const override { return std::make_unique<NkRatio>(*this); }

 private:
  Index pair_index(Index n, Index m) const;
  CellMatrix cross(Index n, Index m, const CellMatrix& a, const CellMatrix& b) const;
  double value(const std::vector<const CellMatrix*>& f, const std::vector<const CellMatrix*>& c) const;

  std::vector<Kernel> kernels_;
  std::vector<Kernel> products_;  // k_n k_m for n <= m
  SpaceSpec space_;
  std::vector<CellMatrix> f_, c_;
  std::vector<CellMatrix> pending_f_, pending_c_;
  std::vector<Index> pending_idx_;
  std::vector<Index> pending_pairs_;
};

/// Largest deviation over t between ||(sum_n int k_n^2(t-s)|G_n(s)|^2 ds)^(1/2)||_X,
/// computed from the images N_{k_n} G_n, and ||sum_n k_n^2 * |G_n|^2 (t)||_{X^2}^(1/2).
/// The deviation is relative to max(1, right-hand side).
double concavification_identity_deviation(std::span<const Kernel> kernels, std::span<const GridFunction> G);

struct EquivalenceReport {
  double A = 0.0;      // R-bound estimate of {N_k}
  double B = 0.0;      // l^1-bound estimate of {T_{k^2}} on (p/2, X^2)
  double sqrtB = 0.0;
  double ratio = 0.0;  // A / sqrt(B)
  double identity_deviation = 0.0;
  BoundEstimate A_estimate, B_estimate;
};

/// Throws InvalidArgument unless every level of X is 2-convex.
EquivalenceReport equivalence_experiment(std::span<const Kernel> kernels, const SpaceSpec& space,
                                         const SearchOptions& opt);

}  // namespace rlab
