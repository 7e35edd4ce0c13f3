#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlab/gridfn.hpp"

namespace rlab {

/// Lebesgue exponent, lattice and grid of an L^p(grid; X) space.
struct SpaceSpec {
  Exponent p;
  LatticeSpec spec;
  Grid grid;

  /// Parses "p=4,X=l2(8,l4(8))"; the grid is supplied separately.
  static SpaceSpec parse(std::string_view text, const Grid& grid);
  SpaceSpec dual() const { return {p.conjugate(), spec.dual(), grid}; }
  std::string to_string() const;
};

enum class Flavor { Deterministic, SquaredKernel };
std::string to_string(Flavor f);
Flavor parse_flavor(std::string_view text);

/// Finite family of convolution operators. With the squared-kernel flavour the
/// operators are T_{k^2}, acting on L^{p/2}(grid; X^2) where (p, X) is the
/// stated space; the squared samples are built once at construction.
class OperatorFamily {
 public:
  OperatorFamily(std::vector<Kernel> kernels, SpaceSpec space, Flavor flavor = Flavor::Deterministic);

  /// Samples closed forms such as "exp:2" on the grid of `space`, radius covering the grid.
  static OperatorFamily from_strings(std::span<const std::string> kernels, const SpaceSpec& space,
                                     Flavor flavor = Flavor::Deterministic);

  Index size() const { return static_cast<Index>(kernels_.size()); }
  const std::vector<Kernel>& kernels() const { return kernels_; }
  /// Kernel of the n-th operator (k or k^2).
  const Kernel& op(Index n) const { return ops_[static_cast<size_t>(n)]; }
  const SpaceSpec& stated_space() const { return space_; }
  /// Space the operators act on.
  const SpaceSpec& domain() const { return domain_; }
  Flavor flavor() const { return flavor_; }
  const Grid& grid() const { return space_.grid; }

  /// Reflected operators on the dual space (p', X*).
  OperatorFamily adjoint() const;
  /// The first `count` operators.
  OperatorFamily prefix(Index count) const;
  OperatorFamily scaled(double c) const;

  GridFunction apply(Index n, const GridFunction& f) const;

 private:
  OperatorFamily() = default;
  std::vector<Kernel> kernels_;
  std::vector<Kernel> ops_;
  SpaceSpec space_;
  SpaceSpec domain_;
  Flavor flavor_ = Flavor::Deterministic;
};

/// Interleaves a family into one function with values in X(l^s_N): column j*N + n
/// holds coordinate j of member n.
GridFunction stack_family(std::span<const GridFunction> fs, const Exponent& s);
std::vector<GridFunction> unstack_family(const GridFunction& stacked, const LatticeSpec& member_spec, Index members);

/// Norm of (f_n) in L^p(grid; X(l^s_N)).
double family_norm(std::span<const GridFunction> fs, const Exponent& p, const Exponent& s);

/// The functional G in L^{p'}(grid; Y*) with <F, G> = ||F||_{L^p(Y)} and unit dual norm.
GridFunction lp_norming_functional(const GridFunction& f, const Exponent& p);

}  // namespace rlab
