#include "rlab/grid.hpp"

#include <cmath>
#include <sstream>

#include "rlab/defaults.hpp"
#include "rlab/errors.hpp"

namespace rlab {

namespace {
Index cell_count(double a, double b, double h) {
  if (!(h > 0) || !(b > a)) throw InvalidArgument("grid needs h > 0 and b > a");
  const double n = (b - a) / h;
  const double r = std::round(n);
  if (std::abs(n - r) > 1e-9 * std::max(1.0, r))
    throw InvalidArgument("grid interval length is not a multiple of the step");
  return static_cast<Index>(r);
}
}  // namespace

Grid Grid::line(double a, double b, double h) {
  Grid g;
  g.dim = 1;
  g.origin = {a, 0.0};
  g.step = h;
  g.extent = {cell_count(a, b, h), 1};
  g.validate();
  return g;
}

Grid Grid::square(double a, double b, double h) {
  Grid g;
  g.dim = 2;
  g.origin = {a, a};
  g.step = h;
  const Index n = cell_count(a, b, h);
  g.extent = {n, n};
  g.validate();
  return g;
}

void Grid::validate() const {
  if (dim != 1 && dim != 2) throw InvalidArgument("grids support d = 1 or d = 2");
  if (!(step > 0) || !std::isfinite(step)) throw InvalidArgument("grid step must be positive");
  if (extent[0] < 1 || extent[1] < 1) throw InvalidArgument("grid extent must be positive");
  if (dim == 1 && extent[1] != 1) throw InvalidArgument("one-dimensional grid with a second extent");
  if (cells() > defaults().max_cells)
    throw InvalidArgument("grid has " + std::to_string(cells()) + " cells, above the cap of " +
                          std::to_string(defaults().max_cells));
}

bool Grid::compatible_with(const Grid& o) const { return dim == o.dim && step == o.step; }

std::string Grid::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "d=" << dim << " h=" << step << " origin=(" << origin[0];
  if (dim == 2) os << "," << origin[1];
  os << ") extent=(" << extent[0];
  if (dim == 2) os << "," << extent[1];
  os << ")";
  return os.str();
}

}  // namespace rlab
