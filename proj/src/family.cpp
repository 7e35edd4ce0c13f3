#include "rlab/family.hpp"

#include <cmath>

#include "rlab/errors.hpp"

namespace rlab {

SpaceSpec SpaceSpec::parse(std::string_view text, const Grid& grid) {
  SpaceSpec s;
  s.grid = grid;
  bool have_p = false, have_x = false;
  size_t pos = 0;
  while (pos < text.size()) {
    int depth = 0;
    size_t end = pos;
    while (end < text.size() && !(text[end] == ',' && depth == 0)) {
      if (text[end] == '(') ++depth;
      if (text[end] == ')') --depth;
      ++end;
    }
    const std::string_view item = text.substr(pos, end - pos);
    const size_t eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigError("space", "expected key=value in '" + std::string(item) + "'");
    const std::string_view key = item.substr(0, eq), val = item.substr(eq + 1);
    try {
      if (key == "p") {
        s.p = Exponent::parse(val);
        have_p = true;
      } else if (key == "X") {
        s.spec = LatticeSpec::parse(val);
        have_x = true;
      } else {
        throw ConfigError("space", "unknown key '" + std::string(key) + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("space.") + std::string(key), e.what());
    }
    pos = end + 1;
  }
  if (!have_p) throw ConfigError("space.p", "missing");
  if (!have_x) throw ConfigError("space.X", "missing");
  return s;
}

std::string SpaceSpec::to_string() const { return "p=" + p.to_string() + ",X=" + spec.to_string(); }

std::string to_string(Flavor f) { return f == Flavor::Deterministic ? "deterministic" : "squared"; }

Flavor parse_flavor(std::string_view text) {
  if (text == "deterministic") return Flavor::Deterministic;
  if (text == "squared") return Flavor::SquaredKernel;
  throw ConfigError("flavor", "expected 'deterministic' or 'squared', got '" + std::string(text) + "'");
}

OperatorFamily::OperatorFamily(std::vector<Kernel> kernels, SpaceSpec space, Flavor flavor)
    : kernels_(std::move(kernels)), space_(std::move(space)), flavor_(flavor) {
  if (kernels_.empty()) throw InvalidArgument("operator family needs at least one kernel");
  space_.grid.validate();
  for (const auto& k : kernels_)
    if (k.dim() != space_.grid.dim || k.step() != space_.grid.step)
      throw DimensionMismatch("kernel '" + k.label() + "' does not match the family grid");
  domain_ = space_;
  if (flavor_ == Flavor::SquaredKernel) {
    if (space_.p.is_finite() && space_.p.value() < 2.0)
      throw InvalidArgument("squared-kernel family needs p >= 2");
    domain_.p = space_.p.scaled(0.5);
    domain_.spec = space_.spec.concavify(2.0);
    for (const auto& k : kernels_) ops_.push_back(k.squared());
  } else {
    ops_ = kernels_;
  }
}

OperatorFamily OperatorFamily::from_strings(std::span<const std::string> kernels, const SpaceSpec& space,
                                            Flavor flavor) {
  if (kernels.empty()) throw ConfigError("family", "kernel list is empty");
  std::vector<Kernel> ks;
  const Index radius = std::max(space.grid.extent[0], space.grid.extent[1]) - 1;
  for (size_t i = 0; i < kernels.size(); ++i) {
    try {
      ks.push_back(Kernel::sample(ClosedForm::parse(kernels[i]), space.grid.dim, space.grid.step, radius));
    } catch (const Error& e) {
      throw ConfigError("family[" + std::to_string(i) + "]", e.what());
    }
  }
  return OperatorFamily(std::move(ks), space, flavor);
}

OperatorFamily OperatorFamily::adjoint() const {
  OperatorFamily a;
  a.flavor_ = Flavor::Deterministic;
  a.space_ = domain_.dual();
  a.domain_ = a.space_;
  for (const auto& k : ops_) a.ops_.push_back(adjoint_kernel(k));
  a.kernels_ = a.ops_;
  return a;
}

OperatorFamily OperatorFamily::prefix(Index count) const {
  if (count < 1 || count > size()) throw InvalidArgument("family prefix out of range");
  OperatorFamily f = *this;
  f.kernels_.resize(static_cast<size_t>(count));
  f.ops_.resize(static_cast<size_t>(count));
  return f;
}

OperatorFamily OperatorFamily::scaled(double c) const {
  OperatorFamily f = *this;
  for (auto& k : f.kernels_) k = k.scaled(c);
  for (size_t i = 0; i < f.ops_.size(); ++i)
    f.ops_[i] = flavor_ == Flavor::SquaredKernel ? f.kernels_[i].squared() : f.kernels_[i];
  return f;
}

GridFunction OperatorFamily::apply(Index n, const GridFunction& f) const { return convolve(op(n), f); }

GridFunction stack_family(std::span<const GridFunction> fs, const Exponent& s) {
  if (fs.empty()) throw InvalidArgument("cannot stack an empty family");
  const Index n = static_cast<Index>(fs.size()), m = fs[0].dim();
  GridFunction out(fs[0].grid(), fs[0].spec().with_inner({s, n}));
  for (Index i = 0; i < n; ++i) {
    const auto& f = fs[static_cast<size_t>(i)];
    if (!(f.grid() == fs[0].grid()) || !(f.spec() == fs[0].spec()))
      throw DimensionMismatch("family members live on different grids or lattices");
    for (Index j = 0; j < m; ++j) out.values().col(j * n + i) = f.values().col(j);
  }
  return out;
}

std::vector<GridFunction> unstack_family(const GridFunction& stacked, const LatticeSpec& member_spec, Index members) {
  const Index m = member_spec.total_dim();
  if (m * members != stacked.dim()) throw DimensionMismatch("stacked function does not split into the family");
  std::vector<GridFunction> out;
  for (Index i = 0; i < members; ++i) {
    GridFunction f(stacked.grid(), member_spec);
    for (Index j = 0; j < m; ++j) f.values().col(j) = stacked.values().col(j * members + i);
    out.push_back(std::move(f));
  }
  return out;
}

double family_norm(std::span<const GridFunction> fs, const Exponent& p, const Exponent& s) {
  return lp_norm(stack_family(fs, s), p);
}

GridFunction lp_norming_functional(const GridFunction& f, const Exponent& p) {
  GridFunction g(f.grid(), f.spec().dual());
  const Eigen::VectorXd norms = cell_norms(f);
  const double vol = f.grid().cell_volume();
  const double total = lp_of_cell_norms(norms, vol, p);
  if (total == 0.0) return g;
  Index arg = 0;
  if (p.is_infinite()) norms.maxCoeff(&arg);
  for (Index c = 0; c < f.cells(); ++c) {
    if (norms[c] == 0.0) continue;
    double w = 0.0;
    if (p.is_infinite()) w = c == arg ? 1.0 / vol : 0.0;
    else if (p.is_one()) w = 1.0;
    else w = std::pow(norms[c] / total, p.value() - 1.0);
    if (w == 0.0) continue;
    const auto row = f.values().row(c);
    g.values().row(c) =
        w * norming_functional(f.spec(), std::span<const double>(row.data(), static_cast<size_t>(row.size())))
                .transpose();
  }
  return g;
}

}  // namespace rlab
