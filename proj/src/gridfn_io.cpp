#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>

#include "rlab/errors.hpp"
#include "rlab/gridfn.hpp"

namespace rlab {

static_assert(std::endian::native == std::endian::little, "binary grid format assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'R', 'L', 'G', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InvalidArgument("truncated grid function stream");
  return v;
}

}  // namespace

void write_csv(std::ostream& os, const GridFunction& f) {
  const Grid& g = f.grid();
  os << "cell,x";
  if (g.dim == 2) os << ",y";
  for (Index j = 0; j < f.dim(); ++j) os << ",c" << j;
  os << "\n";
  const auto old = os.precision(17);
  for (Index i0 = 0; i0 < g.extent[0]; ++i0) {
    for (Index i1 = 0; i1 < (g.dim == 2 ? g.extent[1] : 1); ++i1) {
      const Index c = g.flat(i0, i1);
      os << c << "," << g.center(0, i0);
      if (g.dim == 2) os << "," << g.center(1, i1);
      for (Index j = 0; j < f.dim(); ++j) os << "," << f.values()(c, j);
      os << "\n";
    }
  }
  os.precision(old);
}

void write_binary(std::ostream& os, const GridFunction& f) {
  const Grid& g = f.grid();
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim));
  put<double>(os, g.step);
  put<double>(os, g.origin[0]);
  put<double>(os, g.origin[1]);
  put<std::uint64_t>(os, static_cast<std::uint64_t>(g.extent[0]));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(g.extent[1]));
  const std::string spec = f.spec().to_string();
  put<std::uint32_t>(os, static_cast<std::uint32_t>(spec.size()));
  os.write(spec.data(), static_cast<std::streamsize>(spec.size()));
  os.write(reinterpret_cast<const char*>(f.values().data()),
           static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(f.values().size())));
}

GridFunction read_binary(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || !std::equal(magic, magic + 4, kMagic)) throw InvalidArgument("not a grid function stream");
  if (get<std::uint32_t>(is) != kVersion) throw InvalidArgument("unsupported grid function version");
  Grid g;
  g.dim = static_cast<int>(get<std::uint32_t>(is));
  g.step = get<double>(is);
  g.origin[0] = get<double>(is);
  g.origin[1] = get<double>(is);
  g.extent[0] = static_cast<Index>(get<std::uint64_t>(is));
  g.extent[1] = static_cast<Index>(get<std::uint64_t>(is));
  g.validate();
  const auto len = get<std::uint32_t>(is);
  std::string spec(len, '\0');
  is.read(spec.data(), len);
  if (!is) throw InvalidArgument("truncated grid function stream");
  GridFunction f(g, LatticeSpec::parse(spec));
  is.read(reinterpret_cast<char*>(f.values().data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(f.values().size())));
  if (!is) throw InvalidArgument("truncated grid function stream");
  return f;
}

}  // namespace rlab
