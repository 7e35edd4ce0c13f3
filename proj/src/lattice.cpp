#include "rlab/lattice.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace rlab {

LatticeSpec::LatticeSpec() : LatticeSpec(std::vector<Level>{{Exponent(2.0), 1}}) {}

LatticeSpec::LatticeSpec(std::vector<Level> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw InvalidArgument("lattice spec needs at least one level");
  total_ = 1;
  for (const auto& l : levels_) {
    if (l.dim < 1) throw InvalidArgument("lattice level dimension must be >= 1");
    total_ *= l.dim;
  }
}

LatticeSpec LatticeSpec::scalar() { return LatticeSpec(); }

namespace {

class SpecParser {
 public:
  explicit SpecParser(std::string_view s) : s_(s) {}

  LatticeSpec parse_all() {
    std::vector<Level> levels;
    parse_level(levels);
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
    return LatticeSpec(std::move(levels));
  }

 private:
  void parse_level(std::vector<Level>& out) {
    skip_ws();
    expect('l');
    size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != '(') ++pos_;
    std::string_view tok = s_.substr(start, pos_ - start);
    if (tok.empty()) fail("missing exponent");
    Exponent q = Exponent::parse(tok);
    expect('(');
    skip_ws();
    size_t dstart = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (dstart == pos_) fail("missing dimension");
    Index dim = std::stoll(std::string(s_.substr(dstart, pos_ - dstart)));
    out.push_back({q, dim});
    skip_ws();
    if (peek() == ',') {
      ++pos_;
      parse_level(out);
      skip_ws();
    }
    expect(')');
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidArgument("lattice spec '" + std::string(s_) + "': " + what + " at position " +
                          std::to_string(pos_));
  }

  std::string_view s_;
  size_t pos_ = 0;
};

}  // namespace

LatticeSpec LatticeSpec::parse(std::string_view text) { return SpecParser(text).parse_all(); }

LatticeSpec LatticeSpec::dual() const {
  auto lv = levels_;
  for (auto& l : lv) l.q = l.q.conjugate();
  return LatticeSpec(std::move(lv));
}

LatticeSpec LatticeSpec::concavify(double s) const {
  auto lv = levels_;
  for (auto& l : lv) {
    if (l.q.is_finite() && l.q.value() < s)
      throw InvalidArgument("concavify(" + std::to_string(s) + ") needs every exponent >= s, got " +
                            l.q.to_string());
    l.q = l.q.scaled(1.0 / s);
  }
  return LatticeSpec(std::move(lv));
}

LatticeSpec LatticeSpec::convexify(double s) const {
  if (s < 1.0) throw InvalidArgument("convexify needs s >= 1");
  auto lv = levels_;
  for (auto& l : lv) l.q = l.q.scaled(s);
  return LatticeSpec(std::move(lv));
}

LatticeSpec LatticeSpec::with_inner(Level level) const {
  auto lv = levels_;
  lv.push_back(level);
  return LatticeSpec(std::move(lv));
}

LatticeSpec LatticeSpec::with_outer(Level level) const {
  auto lv = levels_;
  lv.insert(lv.begin(), level);
  return LatticeSpec(std::move(lv));
}

bool LatticeSpec::all_finite() const {
  return std::none_of(levels_.begin(), levels_.end(), [](const Level& l) { return l.q.is_infinite(); });
}

bool LatticeSpec::strictly_convex() const {
  return std::none_of(levels_.begin(), levels_.end(),
                      [](const Level& l) { return l.q.is_infinite() || l.q.is_one(); });
}

std::string LatticeSpec::to_string() const {
  std::string out;
  for (const auto& l : levels_) out += "l" + l.q.to_string() + "(" + std::to_string(l.dim) + ",";
  out.pop_back();
  out.append(levels_.size(), ')');
  return out;
}

double lq_norm(const double* data, Index n, const Exponent& q) {
  if (q.is_infinite()) {
    double m = 0.0;
    for (Index i = 0; i < n; ++i) m = std::max(m, std::abs(data[i]));
    return m;
  }
  const double qv = q.value();
  if (qv == 1.0) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += std::abs(data[i]);
    return s;
  }
  if (qv == 2.0) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += data[i] * data[i];
    return std::sqrt(s);
  }
  double scale = 0.0;
  for (Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(data[i]));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (Index i = 0; i < n; ++i) s += std::pow(std::abs(data[i]) / scale, qv);
  return scale * std::pow(s, 1.0 / qv);
}

namespace {

void check_size(const LatticeSpec& spec, size_t n) {
  if (static_cast<Index>(n) != spec.total_dim())
    throw DimensionMismatch("coordinate count " + std::to_string(n) + " does not match spec " +
                            spec.to_string() + " of dimension " + std::to_string(spec.total_dim()));
}

}  // namespace

double norm(const LatticeSpec& spec, std::span<const double> coords) {
  check_size(spec, coords.size());
  const auto& lv = spec.levels();
  if (lv.size() == 1) return lq_norm(coords.data(), lv[0].dim, lv[0].q);
  thread_local std::vector<double> buf;
  buf.assign(coords.begin(), coords.end());
  Index size = spec.total_dim();
  for (auto it = lv.rbegin(); it != lv.rend(); ++it) {
    const Index m = it->dim;
    const Index blocks = size / m;
    for (Index b = 0; b < blocks; ++b) buf[b] = lq_norm(buf.data() + b * m, m, it->q);
    size = blocks;
  }
  return buf[0];
}

Eigen::VectorXd norming_functional(const LatticeSpec& spec, std::span<const double> coords) {
  check_size(spec, coords.size());
  const auto& lv = spec.levels();
  const size_t depth = lv.size();
  // vals[l] holds the norms of the level-l blocks; vals[depth] the absolute coordinates.
  std::vector<std::vector<double>> vals(depth + 1);
  vals[depth].resize(coords.size());
  for (size_t j = 0; j < coords.size(); ++j) vals[depth][j] = std::abs(coords[j]);
  for (size_t l = depth; l-- > 0;) {
    const Index m = lv[l].dim;
    const Index blocks = static_cast<Index>(vals[l + 1].size()) / m;
    vals[l].resize(blocks);
    for (Index b = 0; b < blocks; ++b) vals[l][b] = lq_norm(vals[l + 1].data() + b * m, m, lv[l].q);
  }

  std::vector<double> w{1.0}, next;
  for (size_t l = 0; l < depth; ++l) {
    const Index m = lv[l].dim;
    const Exponent& q = lv[l].q;
    next.assign(vals[l + 1].size(), 0.0);
    for (Index b = 0; b < static_cast<Index>(vals[l].size()); ++b) {
      const double total = vals[l][b];
      if (total == 0.0 || w[b] == 0.0) continue;
      const double* c = vals[l + 1].data() + b * m;
      double* u = next.data() + b * m;
      if (q.is_infinite()) {
        Index arg = 0;
        for (Index i = 1; i < m; ++i)
          if (c[i] > c[arg]) arg = i;
        u[arg] = w[b];
      } else if (q.is_one()) {
        for (Index i = 0; i < m; ++i) u[i] = w[b];
      } else {
        const double qm1 = q.value() - 1.0;
        for (Index i = 0; i < m; ++i) u[i] = w[b] * std::pow(c[i] / total, qm1);
      }
    }
    w.swap(next);
  }

  Eigen::VectorXd out(static_cast<Index>(coords.size()));
  for (size_t j = 0; j < coords.size(); ++j) {
    const double x = coords[j];
    out[static_cast<Index>(j)] = x > 0 ? w[j] : (x < 0 ? -w[j] : 0.0);
  }
  return out;
}

LatticeVec::LatticeVec(LatticeSpec s, Eigen::VectorXd c) : spec(std::move(s)), coords(std::move(c)) {
  check_size(spec, static_cast<size_t>(coords.size()));
}

Eigen::VectorXd pointwise_lq(std::span<const Eigen::VectorXd> xs, const Exponent& s) {
  if (xs.empty()) throw InvalidArgument("pointwise l^s combination of an empty list");
  const Index dim = xs[0].size();
  for (const auto& x : xs)
    if (x.size() != dim) throw DimensionMismatch("pointwise l^s combination of unequal lengths");
  const Index n = static_cast<Index>(xs.size());
  Eigen::VectorXd out(dim);
  std::vector<double> col(static_cast<size_t>(n));
  for (Index j = 0; j < dim; ++j) {
    for (Index i = 0; i < n; ++i) col[static_cast<size_t>(i)] = xs[static_cast<size_t>(i)][j];
    out[j] = lq_norm(col.data(), n, s);
  }
  return out;
}

double mixed_seq_norm(std::span<const LatticeVec> xs, const Exponent& s) {
  if (xs.empty()) throw InvalidArgument("mixed_seq_norm of an empty list");
  std::vector<Eigen::VectorXd> cs;
  cs.reserve(xs.size());
  for (const auto& x : xs) {
    if (!(x.spec == xs[0].spec)) throw DimensionMismatch("mixed_seq_norm: elements have different specs");
    cs.push_back(x.coords);
  }
  return norm(xs[0].spec, pointwise_lq(cs, s));
}

namespace krivine {

namespace {
const LatticeSpec& common_spec(std::span<const LatticeVec> xs) {
  if (xs.empty()) throw InvalidArgument("Krivine operation on an empty list");
  for (const auto& x : xs)
    if (!(x.spec == xs[0].spec)) throw DimensionMismatch("Krivine operation on different specs");
  return xs[0].spec;
}
}  // namespace

LatticeVec abs(const LatticeVec& x) { return {x.spec, x.coords.cwiseAbs()}; }

LatticeVec power(const LatticeVec& x, double theta) {
  if (!(theta > 0)) throw InvalidArgument("Krivine power needs theta > 0");
  if ((x.coords.array() < 0).any()) throw InvalidArgument("Krivine power of a negative coordinate");
  return {x.spec, x.coords.array().pow(theta).matrix()};
}

LatticeVec sup(std::span<const LatticeVec> xs) {
  LatticeVec out{common_spec(xs), xs[0].coords};
  for (const auto& x : xs.subspan(1)) out.coords = out.coords.cwiseMax(x.coords);
  return out;
}

LatticeVec sum(std::span<const LatticeVec> xs) {
  LatticeVec out{common_spec(xs), xs[0].coords};
  for (const auto& x : xs.subspan(1)) out.coords += x.coords;
  return out;
}

LatticeVec product(std::span<const LatticeVec> xs) {
  LatticeVec out{common_spec(xs), xs[0].coords};
  for (const auto& x : xs.subspan(1)) out.coords = out.coords.cwiseProduct(x.coords);
  return out;
}

}  // namespace krivine

}  // namespace rlab
