#pragma once

#include <Eigen/Core>
#include <functional>
#include <iosfwd>
#include <span>

#include "rlab/exponent.hpp"
#include "rlab/grid.hpp"
#include "rlab/kernel.hpp"
#include "rlab/lattice.hpp"

namespace rlab {

/// One row per cell, one column per lattice coordinate.
using CellMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Piecewise-constant function on a grid with values in a mixed-norm lattice.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(Grid grid, LatticeSpec spec);
  GridFunction(Grid grid, LatticeSpec spec, CellMatrix values);

  /// Fills each cell from fn(center, out) where out has spec.total_dim() entries.
  static GridFunction from_function(const Grid& grid, const LatticeSpec& spec,
                                    const std::function<void(const double* center, double* out)>& fn);

  const Grid& grid() const { return grid_; }
  const LatticeSpec& spec() const { return spec_; }
  const CellMatrix& values() const { return values_; }
  CellMatrix& values() { return values_; }
  Index cells() const { return values_.rows(); }
  Index dim() const { return values_.cols(); }
  LatticeVec at(Index cell) const { return {spec_, values_.row(cell).transpose()}; }

 private:
  Grid grid_;
  LatticeSpec spec_;
  CellMatrix values_;
};

/// Lattice norm of every cell value.
Eigen::VectorXd cell_norms(const GridFunction& f);
/// (sum_c w_c^p h^d)^(1/p), or max_c w_c for p = infinity.
double lp_of_cell_norms(const Eigen::VectorXd& norms, double cell_volume, const Exponent& p);
double lp_norm(const GridFunction& f, const Exponent& p);
/// h^d sum_c <f_c, g_c>.
double pairing(const GridFunction& f, const GridFunction& g);

enum class ConvolutionMethod { Auto, Direct, FFT };

/// (k*f)_i = sum_j k((i-j)h) f_j h^d on f's grid, zero extension, coordinatewise.
GridFunction convolve(const Kernel& k, const GridFunction& f, ConvolutionMethod method = ConvolutionMethod::Auto);
/// Scalar convolution of one coordinate column (length grid.cells()).
Eigen::VectorXd convolve_scalar(const Kernel& k, const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& f,
                                ConvolutionMethod method = ConvolutionMethod::Auto);

/// The reflected kernel, adjoint of convolution under the grid pairing.
Kernel adjoint_kernel(const Kernel& k);

/// CSV with columns cell, x[, y], c0..c{M-1}.
void write_csv(std::ostream& os, const GridFunction& f);
/// Binary format: magic, version, d, h, origin, extent, spec string, values (little endian doubles).
void write_binary(std::ostream& os, const GridFunction& f);
GridFunction read_binary(std::istream& is);

}  // namespace rlab
