#include "rlab/gridfn.hpp"

#include <unsupported/Eigen/FFT>
#include <cmath>
#include <complex>
#include <vector>

#include "rlab/defaults.hpp"
#include "rlab/errors.hpp"
#include "rlab/parallel.hpp"

namespace rlab {

GridFunction::GridFunction(Grid grid, LatticeSpec spec)
    : grid_(grid), spec_(std::move(spec)), values_(CellMatrix::Zero(grid.cells(), spec_.total_dim())) {
  grid_.validate();
}

GridFunction::GridFunction(Grid grid, LatticeSpec spec, CellMatrix values)
    : grid_(grid), spec_(std::move(spec)), values_(std::move(values)) {
  grid_.validate();
  if (values_.rows() != grid_.cells() || values_.cols() != spec_.total_dim())
    throw DimensionMismatch("grid function values must be cells x lattice dimension");
}

GridFunction GridFunction::from_function(const Grid& grid, const LatticeSpec& spec,
                                         const std::function<void(const double*, double*)>& fn) {
  GridFunction f(grid, spec);
  double x[2] = {0.0, 0.0};
  for (Index i0 = 0; i0 < grid.extent[0]; ++i0) {
    for (Index i1 = 0; i1 < (grid.dim == 2 ? grid.extent[1] : 1); ++i1) {
      x[0] = grid.center(0, i0);
      if (grid.dim == 2) x[1] = grid.center(1, i1);
      fn(x, f.values_.row(grid.flat(i0, i1)).data());
    }
  }
  return f;
}

Eigen::VectorXd cell_norms(const GridFunction& f) {
  Eigen::VectorXd out(f.cells());
  const auto& v = f.values();
  for (Index c = 0; c < f.cells(); ++c)
    out[c] = norm(f.spec(), std::span<const double>(v.row(c).data(), static_cast<size_t>(v.cols())));
  return out;
}

double lp_of_cell_norms(const Eigen::VectorXd& norms, double cell_volume, const Exponent& p) {
  if (norms.size() == 0) return 0.0;
  if (p.is_infinite()) return norms.cwiseAbs().maxCoeff();
  const double scale = norms.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  const double q = p.value();
  double s = 0.0;
  if (q == 1.0) {
    for (Index i = 0; i < norms.size(); ++i) s += std::abs(norms[i]);
    return s * cell_volume;
  }
  if (q == 2.0) {
    for (Index i = 0; i < norms.size(); ++i) s += norms[i] * norms[i];
    return std::sqrt(s * cell_volume);
  }
  for (Index i = 0; i < norms.size(); ++i) s += std::pow(std::abs(norms[i]) / scale, q);
  return scale * std::pow(s * cell_volume, 1.0 / q);
}

double lp_norm(const GridFunction& f, const Exponent& p) {
  return lp_of_cell_norms(cell_norms(f), f.grid().cell_volume(), p);
}

double pairing(const GridFunction& f, const GridFunction& g) {
  if (!(f.grid() == g.grid()) || f.dim() != g.dim()) throw DimensionMismatch("pairing of incompatible grid functions");
  return f.grid().cell_volume() * f.values().cwiseProduct(g.values()).sum();
}

namespace {

using Complex = std::complex<double>;

Index next_pow2(Index n) {
  Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

void check_compatible(const Kernel& k, const Grid& grid) {
  if (k.dim() != grid.dim) throw DimensionMismatch("kernel and grid dimensions differ");
  if (k.step() != grid.step) throw DimensionMismatch("kernel step differs from grid step");
}

bool use_fft(const Kernel& k, const Grid& grid, ConvolutionMethod method) {
  if (method == ConvolutionMethod::Direct) return false;
  if (method == ConvolutionMethod::FFT) return true;
  const Index thr = defaults().fft_threshold;
  return (grid.extent[0] > thr || (grid.dim == 2 && grid.extent[1] > thr)) && k.radius() > 16;
}

/// Precomputed spectrum of a kernel for repeated FFT convolutions on one grid.
struct KernelSpectrum {
  Index n0, n1, r0, r1, l0, l1;
  std::vector<Complex> spectrum;
};

void fft2(Eigen::FFT<double>& fft, std::vector<Complex>& data, Index l0, Index l1, bool inverse) {
  std::vector<Complex> in, out;
  if (l1 > 1) {
    in.resize(static_cast<size_t>(l1));
    for (Index r = 0; r < l0; ++r) {
      std::copy(data.begin() + r * l1, data.begin() + (r + 1) * l1, in.begin());
      if (inverse) fft.inv(out, in);
      else fft.fwd(out, in);
      std::copy(out.begin(), out.end(), data.begin() + r * l1);
    }
  }
  if (l0 > 1) {
    in.resize(static_cast<size_t>(l0));
    for (Index c = 0; c < l1; ++c) {
      for (Index r = 0; r < l0; ++r) in[static_cast<size_t>(r)] = data[static_cast<size_t>(r * l1 + c)];
      if (inverse) fft.inv(out, in);
      else fft.fwd(out, in);
      for (Index r = 0; r < l0; ++r) data[static_cast<size_t>(r * l1 + c)] = out[static_cast<size_t>(r)];
    }
  }
}

KernelSpectrum kernel_spectrum(const Kernel& k, const Grid& grid) {
  KernelSpectrum s;
  s.n0 = grid.extent[0];
  s.n1 = grid.dim == 2 ? grid.extent[1] : 1;
  s.r0 = std::min(k.radius(), s.n0 - 1);
  s.r1 = grid.dim == 2 ? std::min(k.radius(), s.n1 - 1) : 0;
  s.l0 = next_pow2(s.n0 + 2 * s.r0);
  s.l1 = grid.dim == 2 ? next_pow2(s.n1 + 2 * s.r1) : 1;
  s.spectrum.assign(static_cast<size_t>(s.l0 * s.l1), Complex(0.0, 0.0));
  for (Index a = -s.r0; a <= s.r0; ++a)
    for (Index b = -s.r1; b <= s.r1; ++b)
      s.spectrum[static_cast<size_t>((a + s.r0) * s.l1 + (b + s.r1))] = k.at(a, b);
  Eigen::FFT<double> fft;
  fft2(fft, s.spectrum, s.l0, s.l1, false);
  return s;
}

void convolve_fft(const KernelSpectrum& s, double vol, const double* in, Index in_stride, double* out,
                  Index out_stride) {
  std::vector<Complex> buf(static_cast<size_t>(s.l0 * s.l1), Complex(0.0, 0.0));
  for (Index a = 0; a < s.n0; ++a)
    for (Index b = 0; b < s.n1; ++b) buf[static_cast<size_t>(a * s.l1 + b)] = in[(a * s.n1 + b) * in_stride];
  Eigen::FFT<double> fft;
  fft2(fft, buf, s.l0, s.l1, false);
  for (size_t i = 0; i < buf.size(); ++i) buf[i] *= s.spectrum[i];
  fft2(fft, buf, s.l0, s.l1, true);
  for (Index a = 0; a < s.n0; ++a)
    for (Index b = 0; b < s.n1; ++b)
      out[(a * s.n1 + b) * out_stride] = vol * buf[static_cast<size_t>((a + s.r0) * s.l1 + (b + s.r1))].real();
}

void convolve_direct(const Kernel& k, const Grid& grid, const double* in, Index in_stride, double* out,
                     Index out_stride) {
  const double vol = grid.cell_volume();
  const Index r = k.radius();
  if (grid.dim == 1) {
    const Index n = grid.extent[0];
    const double* ks = k.samples().data() + r;  // ks[m] = k(m h)
    for (Index i = 0; i < n; ++i) {
      const Index lo = std::max<Index>(0, i - r), hi = std::min<Index>(n - 1, i + r);
      double acc = 0.0;
      for (Index j = lo; j <= hi; ++j) acc += ks[i - j] * in[j * in_stride];
      out[i * out_stride] = vol * acc;
    }
    return;
  }
  const Index n0 = grid.extent[0], n1 = grid.extent[1];
  for (Index i0 = 0; i0 < n0; ++i0) {
    for (Index i1 = 0; i1 < n1; ++i1) {
      double acc = 0.0;
      const Index lo0 = std::max<Index>(0, i0 - r), hi0 = std::min<Index>(n0 - 1, i0 + r);
      const Index lo1 = std::max<Index>(0, i1 - r), hi1 = std::min<Index>(n1 - 1, i1 + r);
      for (Index j0 = lo0; j0 <= hi0; ++j0)
        for (Index j1 = lo1; j1 <= hi1; ++j1) acc += k.at(i0 - j0, i1 - j1) * in[(j0 * n1 + j1) * in_stride];
      out[(i0 * n1 + i1) * out_stride] = vol * acc;
    }
  }
}

}  // namespace

GridFunction convolve(const Kernel& k, const GridFunction& f, ConvolutionMethod method) {
  check_compatible(k, f.grid());
  GridFunction out(f.grid(), f.spec());
  const Index cols = f.dim();
  const double* in = f.values().data();
  double* o = out.values().data();
  if (use_fft(k, f.grid(), method)) {
    const KernelSpectrum s = kernel_spectrum(k, f.grid());
    parallel_for(cols, [&](Index c) { convolve_fft(s, f.grid().cell_volume(), in + c, cols, o + c, cols); });
  } else {
    parallel_for(cols, [&](Index c) { convolve_direct(k, f.grid(), in + c, cols, o + c, cols); });
  }
  return out;
}

Eigen::VectorXd convolve_scalar(const Kernel& k, const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& f,
                                ConvolutionMethod method) {
  check_compatible(k, grid);
  if (f.size() != grid.cells()) throw DimensionMismatch("scalar convolution input length differs from grid");
  Eigen::VectorXd in = f, out(grid.cells());
  if (use_fft(k, grid, method)) {
    const KernelSpectrum s = kernel_spectrum(k, grid);
    convolve_fft(s, grid.cell_volume(), in.data(), 1, out.data(), 1);
  } else {
    convolve_direct(k, grid, in.data(), 1, out.data(), 1);
  }
  return out;
}

Kernel adjoint_kernel(const Kernel& k) { return k.reflected(); }

}  // namespace rlab
