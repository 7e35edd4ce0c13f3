#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rlab/family.hpp"

namespace rlab {

enum class SearchMethod { RandomSearch, AlternatingAscent };
std::string to_string(SearchMethod m);

struct WitnessMember {
  Index kernel = 0;
  GridFunction f;
};

/// A certified lower bound: `witness` re-evaluates to `value`.
struct BoundEstimate {
  double value = 0.0;
  std::vector<WitnessMember> witness;
  SearchMethod method = SearchMethod::RandomSearch;
  Index iterations = 0;
  bool is_lower_bound = true;
  Index restarts = 0;
  Index best_restart = 0;
  std::uint64_t seed = 0;

  std::vector<GridFunction> functions() const;
};

struct SearchOptions {
  Index budget = 0;            // member image evaluations over all restarts; 0 = default
  Index restarts = 0;          // random restarts; 0 = default
  std::uint64_t seed = 0;      // 0 = default
  Index ascent_steps = 40;     // alternating ascent steps per restart where supported
  Index sign_samples = 256;    // sign patterns for R-bounds of families above the exact threshold
  /// Starting witnesses, tried first; each needs one function per family member.
  std::vector<std::vector<GridFunction>> seeds;
};

/// Ratio of two nonnegative functionals of a witness (f_1, ..., f_N), with
/// incremental re-evaluation when a few members change.
class RatioObjective {
 public:
  virtual ~RatioObjective() = default;
  virtual Index members() const = 0;
  virtual const Grid& grid() const = 0;
  virtual const LatticeSpec& member_spec() const = 0;
  /// Loads a witness; returns the ratio, or NaN when the denominator vanishes.
  virtual double reset(const std::vector<CellMatrix>& w) = 0;
  /// Ratio after replacing the listed members; the state is unchanged until commit().
  virtual double propose(std::span<const std::pair<Index, CellMatrix>> changes) = 0;
  virtual void commit() = 0;
  /// Replaces w by a witness whose ratio is at least the current one, when supported.
  virtual bool ascent(std::vector<CellMatrix>& /*w*/) { return false; }
  virtual std::unique_ptr<RatioObjective> clone() const = 0;
};

/// Random restarts (seeded witnesses first), optional alternating ascent, then
/// first-improvement local moves in (member, cell) order: sign flips, cell
/// rescaling, support growth, shifts by one cell, member rescaling and mass
/// rebalancing between neighbouring members. Restarts run in parallel and the
/// best is chosen by (value, restart index).
BoundEstimate maximize_ratio(const RatioObjective& prototype, const SearchOptions& opt);

/// ||(sum |T_n f_n|^s)^(1/s)|| / ||(sum |f_n|^s)^(1/s)|| in L^p(grid; X).
class LsRatio : public RatioObjective {
 public:
  LsRatio(OperatorFamily family, Exponent s);
  Index members() const override { return family_.size(); }
  const Grid& grid() const override { return family_.grid(); }
  const LatticeSpec& member_spec() const override { return family_.domain().spec; }
  double reset(const std::vector<CellMatrix>& w) override;
  double propose(std::span<const std::pair<Index, CellMatrix>> changes) override;
  void commit() override;
  /// One step of the nonlinear power method f -> J*(T* J(T f)).
  bool ascent(std::vector<CellMatrix>& w) override;
  std::unique_ptr<RatioObjective> clone() const override { return std::make_unique<LsRatio>(*this); }

 private:
  double ratio_of(const std::vector<const CellMatrix*>& f, const std::vector<const CellMatrix*>& img) const;
  OperatorFamily family_;
  Exponent s_;
  LatticeSpec stacked_;
  std::vector<CellMatrix> f_, img_, pending_f_, pending_img_;
  std::vector<Index> pending_idx_;
};

/// (E||sum r_n T_n f_n||^2 / E||sum r_n f_n||^2)^(1/2) in L^p(grid; X).
class RRatio : public RatioObjective {
 public:
  RRatio(OperatorFamily family, Index sign_samples, std::uint64_t seed);
  Index members() const override { return family_.size(); }
  const Grid& grid() const override { return family_.grid(); }
  const LatticeSpec& member_spec() const override { return family_.domain().spec; }
  double reset(const std::vector<CellMatrix>& w) override;
  double propose(std::span<const std::pair<Index, CellMatrix>> changes) override;
  void commit() override;
  std::unique_ptr<RatioObjective> clone() const override { return std::make_unique<RRatio>(*this); }

 private:
  double mean_square(const std::vector<const CellMatrix*>& parts) const;
  OperatorFamily family_;
  Eigen::MatrixXd signs_;  // empty for exact enumeration
  std::vector<CellMatrix> f_, img_, pending_f_, pending_img_;
  std::vector<Index> pending_idx_;
};

double evaluate_ls_ratio(const OperatorFamily& family, const Exponent& s, std::span<const GridFunction> f);
double evaluate_R_ratio(const OperatorFamily& family, std::span<const GridFunction> f, Index sign_samples = 256,
                        std::uint64_t seed = 1);

/// Lower bound on the l^s-bound of the family.
BoundEstimate estimate_ls_bound(const OperatorFamily& family, const Exponent& s, const SearchOptions& opt = {});
/// Lower bound on the R-bound of the family.
BoundEstimate estimate_R_bound(const OperatorFamily& family, const SearchOptions& opt = {});

struct DualityReport {
  double primal_value = 0.0;
  double transported_value = 0.0;   // adjoint ratio at the transported witness
  double dual_estimate = 0.0;       // search on the adjoint family seeded with the transport
  double pairing_error = 0.0;       // relative error of <T f, g> = ||T f||
  double dual_norm_error = 0.0;     // | ||g|| - 1 |
  bool transport_ok = false;
  bool bound_ok = false;            // transported_value >= primal_value (1 - tol)
  bool dual_dominates = false;      // dual_estimate >= transported_value (1 - tol)
  /// Levels of the dual space where the norming functional is not unique.
  std::vector<std::string> non_strict_levels;
  bool passed() const { return transport_ok && bound_ok && dual_dominates; }
};

/// Estimates the l^s-bound, transports the witness to the adjoint family on
/// L^{p'}(X*(l^{s'})) through the norming functional and checks the dual side.
DualityReport duality_check(const OperatorFamily& family, const Exponent& s, const SearchOptions& opt = {},
                            double tol = 1e-6);

}  // namespace rlab
