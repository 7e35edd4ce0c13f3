#include "rlab/maximal.hpp"

#include <algorithm>
#include <cmath>

#include "rlab/defaults.hpp"
#include "rlab/errors.hpp"
#include "rlab/parallel.hpp"

namespace rlab {

RadiusSet::RadiusSet(std::vector<double> radii, double h) : radii_(std::move(radii)) {
  if (radii_.empty()) throw InvalidArgument("radius set must be nonempty");
  std::sort(radii_.begin(), radii_.end());
  radii_.erase(std::unique(radii_.begin(), radii_.end()), radii_.end());
  if (radii_.front() < h * (1.0 - 1e-12))
    throw InvalidArgument("radius " + std::to_string(radii_.front()) + " is smaller than the grid step");
}

RadiusSet RadiusSet::dyadic(double h, double max_radius) {
  std::vector<double> r;
  double v = std::exp2(std::ceil(std::log2(h) - 1e-12));
  for (; v <= max_radius * (1.0 + 1e-12); v *= 2.0) r.push_back(v);
  return RadiusSet(std::move(r), h);
}

RadiusSet RadiusSet::dense(double h, double max_radius) {
  std::vector<double> r;
  for (Index m = 2;; ++m) {
    const double v = static_cast<double>(m) * h / 2.0;
    if (v > max_radius * (1.0 + 1e-12)) break;
    r.push_back(v);
  }
  return RadiusSet(std::move(r), h);
}

bool RadiusSet::contains(double r) const {
  return std::any_of(radii_.begin(), radii_.end(),
                     [&](double v) { return std::abs(v - r) <= 1e-12 * std::max(1.0, r); });
}

namespace {

/// Cumulative integrals of |f| at the cell edges, one row per edge.
CellMatrix edge_integrals(const GridFunction& f) {
  const Index n = f.cells(), m = f.dim();
  CellMatrix F(n + 1, m);
  F.row(0).setZero();
  const double h = f.grid().step;
  for (Index i = 0; i < n; ++i) F.row(i + 1) = F.row(i) + h * f.values().row(i).cwiseAbs();
  return F;
}

/// Integral of |f| over (origin, x) as index/fraction pair into the edge table.
struct EdgePos {
  Index cell;   // cell containing x, or -1 / n when outside
  double frac;  // covered fraction of that cell
};

EdgePos locate(const Grid& g, double x) {
  const double u = (x - g.origin[0]) / g.step;
  const Index n = g.extent[0];
  if (u <= 0) return {-1, 0.0};
  if (u >= static_cast<double>(n)) return {n, 0.0};
  double fl = std::floor(u);
  return {static_cast<Index>(fl), u - fl};
}

double integral_to(const CellMatrix& F, const GridFunction& f, const EdgePos& p, Index col) {
  if (p.cell < 0) return 0.0;
  if (p.cell >= f.cells()) return F(f.cells(), col);
  return F(p.cell, col) + p.frac * f.grid().step * std::abs(f.values()(p.cell, col));
}

void maximal_point_1d(const GridFunction& f, const CellMatrix& F, const RadiusSet& J, double xi, double* out) {
  const Index m = f.dim();
  std::fill(out, out + m, 0.0);
  for (double r : J.radii()) {
    const EdgePos lo = locate(f.grid(), xi - r), hi = locate(f.grid(), xi + r);
    const double inv = 1.0 / (2.0 * r);
    for (Index c = 0; c < m; ++c) {
      const double avg = (integral_to(F, f, hi, c) - integral_to(F, f, lo, c)) * inv;
      out[c] = std::max(out[c], avg);
    }
  }
}

GridFunction maximal_2d(const GridFunction& f, const RadiusSet& J) {
  const Grid& g = f.grid();
  const Index n0 = g.extent[0], n1 = g.extent[1], m = f.dim();
  // Row prefix sums of |f|: P(i0, i1) = sum_{j < i1} |f(i0, j)|.
  std::vector<CellMatrix> prefix(static_cast<size_t>(n0), CellMatrix::Zero(n1 + 1, m));
  for (Index i0 = 0; i0 < n0; ++i0)
    for (Index i1 = 0; i1 < n1; ++i1)
      prefix[static_cast<size_t>(i0)].row(i1 + 1) =
          prefix[static_cast<size_t>(i0)].row(i1) + f.values().row(g.flat(i0, i1)).cwiseAbs();

  struct Disc {
    std::vector<Index> half;  // half[a + R] = largest |b| with a^2 + b^2 <= (r/h)^2
    Index reach = 0;
    double count = 0.0;
  };
  std::vector<Disc> discs;
  for (double r : J.radii()) {
    Disc d;
    const double rr = r / g.step;
    d.reach = static_cast<Index>(std::floor(rr + 1e-9));
    for (Index a = -d.reach; a <= d.reach; ++a) {
      const double rem = rr * rr - static_cast<double>(a * a);
      const Index b = static_cast<Index>(std::floor(std::sqrt(std::max(0.0, rem)) + 1e-9));
      d.half.push_back(b);
      d.count += static_cast<double>(2 * b + 1);
    }
    discs.push_back(std::move(d));
  }

  GridFunction out(g, f.spec());
  parallel_for(n0, [&](Index i0) {
    Eigen::RowVectorXd acc(m);
    for (Index i1 = 0; i1 < n1; ++i1) {
      auto o = out.values().row(g.flat(i0, i1));
      o.setZero();
      for (const Disc& d : discs) {
        acc.setZero();
        for (Index a = -d.reach; a <= d.reach; ++a) {
          const Index row = i0 + a;
          if (row < 0 || row >= n0) continue;
          const Index b = d.half[static_cast<size_t>(a + d.reach)];
          const Index lo = std::max<Index>(0, i1 - b), hi = std::min<Index>(n1, i1 + b + 1);
          if (hi <= lo) continue;
          acc += prefix[static_cast<size_t>(row)].row(hi) - prefix[static_cast<size_t>(row)].row(lo);
        }
        o = o.cwiseMax(acc / d.count);
      }
    }
  });
  return out;
}

}  // namespace

GridFunction maximal(const GridFunction& f, const RadiusSet& J) {
  if (J.radii().front() < f.grid().step * (1.0 - 1e-12))
    throw InvalidArgument("radius smaller than the grid step");
  if (f.grid().dim == 2) return maximal_2d(f, J);
  const CellMatrix F = edge_integrals(f);
  GridFunction out(f.grid(), f.spec());
  parallel_for(f.cells(), [&](Index i) {
    maximal_point_1d(f, F, J, f.grid().center(0, i), out.values().row(i).data());
  });
  return out;
}

Eigen::VectorXd maximal_at(const GridFunction& f, const RadiusSet& J, double xi) {
  if (f.grid().dim != 1) throw InvalidArgument("maximal_at is one-dimensional");
  const CellMatrix F = edge_integrals(f);
  Eigen::VectorXd out(f.dim());
  maximal_point_1d(f, F, J, xi, out.data());
  return out;
}

double hl_operator_ratio(const GridFunction& f, const RadiusSet& J, const Exponent& p) {
  const double den = lp_norm(f, p);
  if (den == 0.0) throw InvalidArgument("hl_operator_ratio of the zero function");
  return lp_norm(maximal(f, J), p) / den;
}

std::pair<double, double> CounterexampleInstance::interval(Index k, int j) const {
  const double base = static_cast<double>(k) * std::exp2(-n);
  if (catch_all && j == n) return {base, base + std::exp2(-j + 1)};
  return {base + std::exp2(-j), base + std::exp2(-j + 1)};
}

CounterexampleInstance build_counterexample(int n, bool catch_all) {
  if (n < 1) throw InvalidArgument("counterexample needs N >= 1");
  if (n > defaults().counterexample_max_n)
    throw InvalidArgument("counterexample N=" + std::to_string(n) + " exceeds the cap of " +
                          std::to_string(defaults().counterexample_max_n));
  CounterexampleInstance inst;
  inst.n = n;
  inst.catch_all = catch_all;
  inst.grid = Grid::line(0.0, 2.0, std::exp2(-n - 2));
  inst.spec = LatticeSpec({{Exponent::infinity(), Index(1) << n}, {Exponent(2.0), n}});
  return inst;
}

GridFunction CounterexampleInstance::block(Index k) const {
  GridFunction b(grid, LatticeSpec({{Exponent(2.0), n}}));
  const double h = grid.step;
  for (int j = 1; j <= n; ++j) {
    auto [lo, hi] = interval(k, j);
    lo = std::max(lo, 0.0);
    hi = std::min(hi, 1.0);
    if (hi <= lo) continue;
    // Endpoints are multiples of 2^-N = 4h, so cells are covered entirely or not at all.
    const Index first = static_cast<Index>(std::llround(lo / h));
    const Index last = static_cast<Index>(std::llround(hi / h));
    for (Index i = first; i < last; ++i) b.values()(i, j - 1) = 1.0;
  }
  return b;
}

GridFunction CounterexampleInstance::materialize() const {
  GridFunction f(grid, spec);
  for (Index k = 0; k < blocks(); ++k) f.values().middleCols(k * n, n) = block(k).values();
  return f;
}

double counterexample_lower_bound(int n) {
  return std::sqrt(static_cast<double>(n)) / 4.0 * std::sqrt(1.0 - std::exp2(-n));
}

CounterexampleEvaluation evaluate_counterexample(const CounterexampleInstance& inst, const RadiusSet& J) {
  const Index cells = inst.grid.cells();
  Eigen::VectorXd f_sup = Eigen::VectorXd::Zero(cells), m_sup = Eigen::VectorXd::Zero(cells);
  for (Index k = 0; k < inst.blocks(); ++k) {
    const GridFunction b = inst.block(k);
    f_sup = f_sup.cwiseMax(cell_norms(b));
    m_sup = m_sup.cwiseMax(cell_norms(maximal(b, J)));
  }
  CounterexampleEvaluation ev;
  ev.n = inst.n;
  const double h = inst.grid.step;
  ev.f_norm = lp_of_cell_norms(f_sup, h, Exponent(2.0));
  ev.maximal_norm = lp_of_cell_norms(m_sup, h, Exponent(2.0));
  ev.ratio = ev.maximal_norm / ev.f_norm;
  ev.lower_bound = counterexample_lower_bound(inst.n);
  ev.pointwise_sq = m_sup.array().square().matrix();
  ev.window_min_sq = std::numeric_limits<double>::infinity();
  const double lo = std::exp2(-inst.n) + 2.0 * h, hi = 1.0 - 2.0 * h;
  for (Index i = 0; i < cells; ++i) {
    const double t = inst.grid.center(0, i);
    if (t > lo && t < hi) ev.window_min_sq = std::min(ev.window_min_sq, ev.pointwise_sq[i]);
  }
  return ev;
}

}  // namespace rlab
