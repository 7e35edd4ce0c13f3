#include "rlab/rbound.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "rlab/defaults.hpp"
#include "rlab/errors.hpp"
#include "rlab/parallel.hpp"
#include "rlab/rng.hpp"

namespace rlab {

std::string to_string(SearchMethod m) {
  return m == SearchMethod::RandomSearch ? "random-search" : "alternating-ascent";
}

std::vector<GridFunction> BoundEstimate::functions() const {
  std::vector<GridFunction> out;
  for (const auto& w : witness) out.push_back(w.f);
  return out;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

CellMatrix apply_kernel(const Kernel& k, const Grid& grid, const LatticeSpec& spec, const CellMatrix& f) {
  return convolve(k, GridFunction(grid, spec, f)).values();
}

/// Per-cell norms of the stacked family, member n contributing column j*N + n.
Eigen::VectorXd stacked_cell_norms(const LatticeSpec& stacked, const std::vector<const CellMatrix*>& parts) {
  const Index n = static_cast<Index>(parts.size());
  const Index cells = parts[0]->rows(), m = parts[0]->cols();
  Eigen::VectorXd out(cells);
  std::vector<double> row(static_cast<size_t>(n * m));
  for (Index c = 0; c < cells; ++c) {
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j) row[static_cast<size_t>(j * n + i)] = (*parts[static_cast<size_t>(i)])(c, j);
    out[c] = norm(stacked, std::span<const double>(row));
  }
  return out;
}

double lp_of_matrix(const LatticeSpec& spec, const CellMatrix& v, double vol, const Exponent& p) {
  Eigen::VectorXd norms(v.rows());
  for (Index c = 0; c < v.rows(); ++c)
    norms[c] = norm(spec, std::span<const double>(v.row(c).data(), static_cast<size_t>(v.cols())));
  return lp_of_cell_norms(norms, vol, p);
}

std::vector<CellMatrix> values_of(std::span<const GridFunction> fs) {
  std::vector<CellMatrix> w;
  for (const auto& f : fs) w.push_back(f.values());
  return w;
}

}  // namespace

// ---------------------------------------------------------------------------
// l^s ratio

LsRatio::LsRatio(OperatorFamily family, Exponent s)
    : family_(std::move(family)), s_(s), stacked_(family_.domain().spec.with_inner({s, family_.size()})) {}

double LsRatio::ratio_of(const std::vector<const CellMatrix*>& f, const std::vector<const CellMatrix*>& img) const {
  const double vol = grid().cell_volume();
  const Exponent& p = family_.domain().p;
  const double den = lp_of_cell_norms(stacked_cell_norms(stacked_, f), vol, p);
  if (!(den > 0)) return kNaN;
  return lp_of_cell_norms(stacked_cell_norms(stacked_, img), vol, p) / den;
}

double LsRatio::reset(const std::vector<CellMatrix>& w) {
  if (static_cast<Index>(w.size()) != members()) throw DimensionMismatch("witness size differs from family size");
  f_ = w;
  img_.clear();
  for (Index n = 0; n < members(); ++n)
    img_.push_back(apply_kernel(family_.op(n), grid(), member_spec(), f_[static_cast<size_t>(n)]));
  std::vector<const CellMatrix*> fp, ip;
  for (size_t n = 0; n < f_.size(); ++n) {
    fp.push_back(&f_[n]);
    ip.push_back(&img_[n]);
  }
  return ratio_of(fp, ip);
}

double LsRatio::propose(std::span<const std::pair<Index, CellMatrix>> changes) {
  pending_idx_.clear();
  pending_f_.clear();
  pending_img_.clear();
  std::vector<const CellMatrix*> fp, ip;
  for (size_t n = 0; n < f_.size(); ++n) {
    fp.push_back(&f_[n]);
    ip.push_back(&img_[n]);
  }
  pending_f_.reserve(changes.size());
  pending_img_.reserve(changes.size());
  for (const auto& [n, vals] : changes) {
    pending_idx_.push_back(n);
    pending_f_.push_back(vals);
    pending_img_.push_back(apply_kernel(family_.op(n), grid(), member_spec(), vals));
  }
  for (size_t i = 0; i < pending_idx_.size(); ++i) {
    fp[static_cast<size_t>(pending_idx_[i])] = &pending_f_[i];
    ip[static_cast<size_t>(pending_idx_[i])] = &pending_img_[i];
  }
  return ratio_of(fp, ip);
}

void LsRatio::commit() {
  for (size_t i = 0; i < pending_idx_.size(); ++i) {
    f_[static_cast<size_t>(pending_idx_[i])] = std::move(pending_f_[i]);
    img_[static_cast<size_t>(pending_idx_[i])] = std::move(pending_img_[i]);
  }
  pending_idx_.clear();
}

bool LsRatio::ascent(std::vector<CellMatrix>& w) {
  const Index n = members();
  const Grid& g = grid();
  std::vector<GridFunction> images;
  for (Index i = 0; i < n; ++i) images.emplace_back(g, member_spec(), img_[static_cast<size_t>(i)]);
  const GridFunction dual = lp_norming_functional(stack_family(images, s_), family_.domain().p);
  const auto dual_members = unstack_family(dual, member_spec().dual(), n);
  std::vector<GridFunction> back;
  for (Index i = 0; i < n; ++i)
    back.push_back(convolve(adjoint_kernel(family_.op(i)), dual_members[static_cast<size_t>(i)]));
  const GridFunction next = lp_norming_functional(stack_family(back, s_.conjugate()), family_.domain().p.conjugate());
  if (next.values().cwiseAbs().maxCoeff() == 0.0) return false;
  const auto members = unstack_family(next, member_spec(), n);
  for (Index i = 0; i < n; ++i) w[static_cast<size_t>(i)] = members[static_cast<size_t>(i)].values();
  return true;
}

// ---------------------------------------------------------------------------
// R ratio

RRatio::RRatio(OperatorFamily family, Index sign_samples, std::uint64_t seed) : family_(std::move(family)) {
  const Index n = family_.size();
  if (n > defaults().exact_max_terms) {
    Rng rng(derive_seed(seed, 200));
    signs_.resize(sign_samples, n);
    for (Index i = 0; i < sign_samples; ++i)
      for (Index j = 0; j < n; ++j) signs_(i, j) = rng.rademacher();
  }
}

double RRatio::mean_square(const std::vector<const CellMatrix*>& parts) const {
  const LatticeSpec& spec = member_spec();
  const double vol = grid().cell_volume();
  const Exponent& p = family_.domain().p;
  const Index n = static_cast<Index>(parts.size());
  auto sq = [&](const CellMatrix& s) {
    const double v = lp_of_matrix(spec, s, vol, p);
    return v * v;
  };
  if (signs_.size() == 0) {
    CellMatrix s = *parts[0];
    for (Index i = 1; i < n; ++i) s += *parts[static_cast<size_t>(i)];
    std::vector<double> sign(static_cast<size_t>(n), 1.0);
    const std::uint64_t patterns = std::uint64_t(1) << (n - 1);
    double total = sq(s);
    for (std::uint64_t g = 1; g < patterns; ++g) {
      const auto bit = static_cast<size_t>(std::countr_zero(g)) + 1;
      sign[bit] = -sign[bit];
      s += 2.0 * sign[bit] * *parts[bit];
      total += sq(s);
    }
    return total / static_cast<double>(patterns);
  }
  double total = 0.0;
  CellMatrix s;
  for (Index r = 0; r < signs_.rows(); ++r) {
    s = signs_(r, 0) * *parts[0];
    for (Index i = 1; i < n; ++i) s += signs_(r, i) * *parts[static_cast<size_t>(i)];
    total += sq(s);
  }
  return total / static_cast<double>(signs_.rows());
}

double RRatio::reset(const std::vector<CellMatrix>& w) {
  if (static_cast<Index>(w.size()) != members()) throw DimensionMismatch("witness size differs from family size");
  f_ = w;
  img_.clear();
  for (Index n = 0; n < members(); ++n)
    img_.push_back(apply_kernel(family_.op(n), grid(), member_spec(), f_[static_cast<size_t>(n)]));
  std::vector<const CellMatrix*> fp, ip;
  for (size_t n = 0; n < f_.size(); ++n) {
    fp.push_back(&f_[n]);
    ip.push_back(&img_[n]);
  }
  const double den = mean_square(fp);
  if (!(den > 0)) return kNaN;
  return std::sqrt(mean_square(ip) / den);
}

double RRatio::propose(std::span<const std::pair<Index, CellMatrix>> changes) {
  pending_idx_.clear();
  pending_f_.clear();
  pending_img_.clear();
  std::vector<const CellMatrix*> fp, ip;
  for (size_t n = 0; n < f_.size(); ++n) {
    fp.push_back(&f_[n]);
    ip.push_back(&img_[n]);
  }
  pending_f_.reserve(changes.size());
  pending_img_.reserve(changes.size());
  for (const auto& [n, vals] : changes) {
    pending_idx_.push_back(n);
    pending_f_.push_back(vals);
    pending_img_.push_back(apply_kernel(family_.op(n), grid(), member_spec(), vals));
  }
  for (size_t i = 0; i < pending_idx_.size(); ++i) {
    fp[static_cast<size_t>(pending_idx_[i])] = &pending_f_[i];
    ip[static_cast<size_t>(pending_idx_[i])] = &pending_img_[i];
  }
  const double den = mean_square(fp);
  if (!(den > 0)) return kNaN;
  return std::sqrt(mean_square(ip) / den);
}

void RRatio::commit() {
  for (size_t i = 0; i < pending_idx_.size(); ++i) {
    f_[static_cast<size_t>(pending_idx_[i])] = std::move(pending_f_[i]);
    img_[static_cast<size_t>(pending_idx_[i])] = std::move(pending_img_[i]);
  }
  pending_idx_.clear();
}

// ---------------------------------------------------------------------------
// Search engine

namespace {

struct RestartResult {
  double value = kNaN;
  std::vector<CellMatrix> witness;
  Index used = 0;
  bool ascended = false;
};

CellMatrix random_member(Rng& rng, const Grid& g, Index m) {
  CellMatrix f = CellMatrix::Zero(g.cells(), m);
  const int pieces = 1 + static_cast<int>(rng.below(3));
  for (int p = 0; p < pieces; ++p) {
    Eigen::RowVectorXd v(m);
    for (Index j = 0; j < m; ++j) v[j] = rng.normal();
    if (g.dim == 1) {
      const Index n = g.extent[0];
      const Index len = 1 + rng.below(std::max<Index>(1, n / 4));
      const Index start = rng.below(std::max<Index>(1, n - len + 1));
      for (Index i = start; i < std::min(n, start + len); ++i) f.row(i) = v;
    } else {
      const Index n0 = g.extent[0], n1 = g.extent[1];
      const Index l0 = 1 + rng.below(std::max<Index>(1, n0 / 4)), l1 = 1 + rng.below(std::max<Index>(1, n1 / 4));
      const Index s0 = rng.below(std::max<Index>(1, n0 - l0 + 1)), s1 = rng.below(std::max<Index>(1, n1 - l1 + 1));
      for (Index a = s0; a < std::min(n0, s0 + l0); ++a)
        for (Index b = s1; b < std::min(n1, s1 + l1); ++b) f.row(g.flat(a, b)) = v;
    }
  }
  return f;
}

/// Shift by one cell along `axis` (zero fill).
CellMatrix shifted(const CellMatrix& f, const Grid& g, int axis, int dir) {
  CellMatrix out = CellMatrix::Zero(f.rows(), f.cols());
  const Index n0 = g.extent[0], n1 = g.dim == 2 ? g.extent[1] : 1;
  for (Index a = 0; a < n0; ++a) {
    for (Index b = 0; b < n1; ++b) {
      Index sa = a - (axis == 0 ? dir : 0), sb = b - (axis == 1 ? dir : 0);
      if (sa < 0 || sa >= n0 || sb < 0 || sb >= n1) continue;
      out.row(a * n1 + b) = f.row(sa * n1 + sb);
    }
  }
  return out;
}

class LocalSearch {
 public:
  LocalSearch(RatioObjective& obj, std::vector<CellMatrix>& w, double& value, Index& used, Index budget)
      : obj_(obj), w_(w), value_(value), used_(used), budget_(budget) {}

  /// One sweep over all members and cells; returns whether anything improved.
  bool sweep() {
    bool improved = false;
    const Index members = obj_.members();
    const Grid& g = obj_.grid();
    const Index cells = g.cells();
    constexpr Index kChunk = 16;
    for (Index n = 0; n < members && !exhausted(); ++n) {
      for (Index c0 = 0; c0 < cells && !exhausted(); c0 += kChunk) {
        for (Index c = c0; c < std::min(cells, c0 + kChunk) && !exhausted(); ++c) improved |= cell_moves(n, c);
        improved |= member_moves(n);
      }
    }
    return improved;
  }

  bool exhausted() const { return used_ >= budget_; }

 private:
  bool attempt(std::vector<std::pair<Index, CellMatrix>> changes) {
    if (exhausted()) return false;
    used_ += static_cast<Index>(changes.size());
    const double v = obj_.propose(changes);
    if (std::isfinite(v) && v > value_ * (1.0 + 1e-12)) {
      obj_.commit();
      for (auto& [n, vals] : changes) w_[static_cast<size_t>(n)] = std::move(vals);
      value_ = v;
      return true;
    }
    return false;
  }

  bool cell_moves(Index n, Index c) {
    const CellMatrix& f = w_[static_cast<size_t>(n)];
    const Index m = f.cols();
    const bool nonzero = f.row(c).cwiseAbs().maxCoeff() > 0;
    auto with_row = [&](const Eigen::RowVectorXd& r) {
      CellMatrix out = f;
      out.row(c) = r;
      return std::vector<std::pair<Index, CellMatrix>>{{n, std::move(out)}};
    };
    if (!nonzero) {
      // Grow the support from a nonzero neighbour.
      for (Index nb : {c - 1, c + 1}) {
        if (nb < 0 || nb >= f.rows()) continue;
        if (f.row(nb).cwiseAbs().maxCoeff() > 0 && attempt(with_row(f.row(nb)))) return true;
      }
      return false;
    }
    const Eigen::RowVectorXd r = f.row(c);
    if (attempt(with_row(-r))) return true;
    if (m > 1) {
      Eigen::RowVectorXd q = r;
      const Index j = (c + n) % m;
      q[j] = -q[j];
      if (q[j] != 0 && attempt(with_row(q))) return true;
    }
    if (attempt(with_row(2.0 * r))) return true;
    if (attempt(with_row(0.5 * r))) return true;
    return attempt(with_row(Eigen::RowVectorXd::Zero(m)));
  }

  bool member_moves(Index n) {
    const Grid& g = obj_.grid();
    const CellMatrix& f = w_[static_cast<size_t>(n)];
    bool improved = false;
    for (int axis = 0; axis < g.dim; ++axis)
      for (int dir : {-1, 1}) improved |= attempt({{n, shifted(f, g, axis, dir)}});
    improved |= attempt({{n, 1.25 * w_[static_cast<size_t>(n)]}});
    improved |= attempt({{n, 0.8 * w_[static_cast<size_t>(n)]}});
    const Index members = obj_.members();
    if (members > 1) {
      const Index o = (n + 1) % members;
      improved |= attempt({{n, 1.25 * w_[static_cast<size_t>(n)]}, {o, 0.8 * w_[static_cast<size_t>(o)]}});
      improved |= attempt({{n, 0.8 * w_[static_cast<size_t>(n)]}, {o, 1.25 * w_[static_cast<size_t>(o)]}});
    }
    return improved;
  }

  RatioObjective& obj_;
  std::vector<CellMatrix>& w_;
  double& value_;
  Index& used_;
  Index budget_;
};

RestartResult run_restart(const RatioObjective& proto, Index restart, const SearchOptions& opt, std::uint64_t seed,
                          Index budget) {
  RestartResult res;
  auto obj = proto.clone();
  const Index members = obj->members();
  const Index m = obj->member_spec().total_dim();
  const bool seeded = restart < static_cast<Index>(opt.seeds.size());
  Rng rng(derive_seed(seed, 100, static_cast<std::uint64_t>(restart)));

  std::vector<CellMatrix> w;
  double v = kNaN;
  for (int attempt = 0; attempt < 10 && !(std::isfinite(v) && v > 0); ++attempt) {
    if (seeded) {
      w = values_of(opt.seeds[static_cast<size_t>(restart)]);
    } else {
      w.clear();
      for (Index n = 0; n < members; ++n) w.push_back(random_member(rng, obj->grid(), m));
    }
    v = obj->reset(w);
    res.used += members;
    if (seeded) break;
  }
  if (!std::isfinite(v)) return res;

  for (Index step = 0; step < opt.ascent_steps && res.used < budget; ++step) {
    std::vector<CellMatrix> next = w;
    if (!obj->ascent(next)) break;
    const double nv = obj->reset(next);
    res.used += members;
    if (std::isfinite(nv) && nv > v * (1.0 + 1e-12)) {
      w = std::move(next);
      v = nv;
      res.ascended = true;
    } else {
      obj->reset(w);
      break;
    }
  }

  LocalSearch search(*obj, w, v, res.used, budget);
  while (!search.exhausted() && search.sweep()) {
  }
  res.value = v;
  res.witness = std::move(w);
  return res;
}

}  // namespace

BoundEstimate maximize_ratio(const RatioObjective& proto, const SearchOptions& opt) {
  const Index budget = opt.budget > 0 ? opt.budget : defaults().budget;
  const Index restarts = std::max<Index>(opt.restarts > 0 ? opt.restarts : defaults().restarts,
                                         static_cast<Index>(opt.seeds.size()));
  const std::uint64_t seed = opt.seed != 0 ? opt.seed : defaults().seed;
  for (const auto& s : opt.seeds)
    if (static_cast<Index>(s.size()) != proto.members())
      throw DimensionMismatch("seed witness has the wrong number of members");
  const Index per = std::max<Index>(proto.members(), budget / restarts);

  std::vector<RestartResult> results(static_cast<size_t>(restarts));
  parallel_for(restarts, [&](Index r) { results[static_cast<size_t>(r)] = run_restart(proto, r, opt, seed, per); });

  BoundEstimate est;
  est.restarts = restarts;
  est.seed = seed;
  Index best = -1;
  for (Index r = 0; r < restarts; ++r) {
    const auto& res = results[static_cast<size_t>(r)];
    est.iterations += res.used;
    if (std::isfinite(res.value) && (best < 0 || res.value > results[static_cast<size_t>(best)].value)) best = r;
  }
  if (best < 0) throw DegenerateWitness("every restart produced a zero-norm witness");
  const auto& winner = results[static_cast<size_t>(best)];
  est.best_restart = best;
  est.method = winner.ascended ? SearchMethod::AlternatingAscent : SearchMethod::RandomSearch;
  // Report the value of a fresh evaluation so that the witness reproduces it exactly.
  auto fresh = proto.clone();
  est.value = fresh->reset(winner.witness);
  for (Index n = 0; n < proto.members(); ++n)
    est.witness.push_back({n, GridFunction(proto.grid(), proto.member_spec(), winner.witness[static_cast<size_t>(n)])});
  return est;
}

double evaluate_ls_ratio(const OperatorFamily& family, const Exponent& s, std::span<const GridFunction> f) {
  LsRatio obj(family, s);
  return obj.reset(values_of(f));
}

double evaluate_R_ratio(const OperatorFamily& family, std::span<const GridFunction> f, Index sign_samples,
                        std::uint64_t seed) {
  RRatio obj(family, sign_samples, seed);
  return obj.reset(values_of(f));
}

BoundEstimate estimate_ls_bound(const OperatorFamily& family, const Exponent& s, const SearchOptions& opt) {
  return maximize_ratio(LsRatio(family, s), opt);
}

BoundEstimate estimate_R_bound(const OperatorFamily& family, const SearchOptions& opt) {
  const std::uint64_t seed = opt.seed != 0 ? opt.seed : defaults().seed;
  return maximize_ratio(RRatio(family, opt.sign_samples, seed), opt);
}

DualityReport duality_check(const OperatorFamily& family, const Exponent& s, const SearchOptions& opt, double tol) {
  DualityReport rep;
  const BoundEstimate primal = estimate_ls_bound(family, s, opt);
  rep.primal_value = primal.value;

  const Index n = family.size();
  const Exponent& p = family.domain().p;
  std::vector<GridFunction> f = primal.functions();
  const double fnorm = family_norm(f, p, s);
  for (auto& g : f) g.values() /= fnorm;
  std::vector<GridFunction> images;
  for (Index i = 0; i < n; ++i) images.push_back(family.apply(i, f[static_cast<size_t>(i)]));
  const GridFunction stacked = stack_family(images, s);
  const double tf = lp_norm(stacked, p);
  const GridFunction g = lp_norming_functional(stacked, p);
  rep.pairing_error = std::abs(pairing(stacked, g) - tf) / tf;
  rep.dual_norm_error = std::abs(lp_norm(g, p.conjugate()) - 1.0);
  rep.transport_ok = rep.pairing_error <= tol && rep.dual_norm_error <= tol;

  const OperatorFamily adj = family.adjoint();
  std::vector<GridFunction> dual_witness = unstack_family(g, family.domain().spec.dual(), n);
  rep.transported_value = evaluate_ls_ratio(adj, s.conjugate(), dual_witness);
  rep.bound_ok = rep.transported_value >= rep.primal_value * (1.0 - tol);

  SearchOptions dopt = opt;
  dopt.seeds = {dual_witness};
  rep.dual_estimate = estimate_ls_bound(adj, s.conjugate(), dopt).value;
  rep.dual_dominates = rep.dual_estimate >= rep.transported_value * (1.0 - tol);

  const Exponent pd = p.conjugate();
  if (pd.is_infinite() || pd.is_one()) rep.non_strict_levels.push_back("outer L^" + pd.to_string());
  const LatticeSpec dual_stack = family.domain().spec.dual().with_inner({s.conjugate(), n});
  for (size_t l = 0; l < dual_stack.levels().size(); ++l) {
    const Exponent& q = dual_stack.levels()[l].q;
    if (q.is_infinite() || q.is_one())
      rep.non_strict_levels.push_back("level " + std::to_string(l) + " l^" + q.to_string());
  }
  return rep;
}

}  // namespace rlab
