#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "rlab/gridfn.hpp"
#include "rlab/lattice.hpp"

namespace rlab {

enum class SumMethod { ExactEnumeration, MonteCarlo };
std::string to_string(SumMethod m);

struct SumEstimate {
  double value = 0.0;
  SumMethod method = SumMethod::ExactEnumeration;
  Index samples = 0;
  double std_error = 0.0;  // zero for exact enumeration
};

struct SumOptions {
  Index mc_samples = 0;     // 0 selects the default
  std::uint64_t seed = 0;   // 0 selects the default
  Index exact_max = -1;     // -1 selects the default
};

/// (E ||sum r_n x_n||^p)^(1/p) for Rademacher signs; exact enumeration of the
/// 2^(N-1) sign classes up to the exact threshold, Monte Carlo above it.
SumEstimate rademacher_sum_Lp(std::span<const LatticeVec> xs, const Exponent& p, const SumOptions& opt = {});
/// (E ||sum g_n x_n||^p)^(1/p) for independent standard normals, by Monte Carlo.
SumEstimate gaussian_sum_Lp(std::span<const LatticeVec> xs, const Exponent& p, const SumOptions& opt = {});

/// Variants taking the vectors as the columns of a (dim x N) matrix.
SumEstimate rademacher_sum_Lp(const LatticeSpec& spec, const Eigen::MatrixXd& columns, const Exponent& p,
                              const SumOptions& opt = {});
SumEstimate gaussian_sum_Lp(const LatticeSpec& spec, const Eigen::MatrixXd& columns, const Exponent& p,
                            const SumOptions& opt = {});

/// ||(sum_n int |G_n|^2)^(1/2)||_X with the integrals taken coordinatewise.
double square_function_norm(std::span<const GridFunction> gs);
/// Gaussian norm of s -> (G_1(s), ..., G_N(s)) as an operator on L^2 x l^2_N,
/// expanded in the orthonormal basis of normalised cell indicators.
SumEstimate gamma_norm_mc(std::span<const GridFunction> gs, const SumOptions& opt = {});

/// max over random families of (E||sum r_n x_n||^2)^(1/2) / (sum ||x_n||^2)^(1/2).
double type2_constant_probe(const LatticeSpec& spec, Index trials, std::uint64_t seed);

}  // namespace rlab
