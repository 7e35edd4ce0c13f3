#pragma once

#include <Eigen/Core>
#include <array>
#include <string>

namespace rlab {

using Eigen::Index;

/// Uniform grid of cells [origin + i*h, origin + (i+1)*h) per axis, d in {1, 2}.
/// Two-dimensional cells are numbered row-major, axis 1 fastest.
struct Grid {
  int dim = 1;
  std::array<double, 2> origin{0.0, 0.0};
  double step = 1.0;
  std::array<Index, 2> extent{1, 1};

  /// Cells covering [a, b) on the line; (b - a) / h must be an integer up to rounding.
  static Grid line(double a, double b, double h);
  /// Cells covering [a, b)^2.
  static Grid square(double a, double b, double h);

  Index cells() const { return dim == 1 ? extent[0] : extent[0] * extent[1]; }
  double cell_volume() const { return dim == 1 ? step : step * step; }
  double center(int axis, Index i) const { return origin[axis] + (static_cast<double>(i) + 0.5) * step; }
  double left(int axis, Index i) const { return origin[axis] + static_cast<double>(i) * step; }
  Index flat(Index i0, Index i1 = 0) const { return dim == 1 ? i0 : i0 * extent[1] + i1; }

  /// Throws on nonpositive step, empty extent, unsupported dimension or memory cap.
  void validate() const;
  bool compatible_with(const Grid& other) const;
  std::string describe() const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

}  // namespace rlab
