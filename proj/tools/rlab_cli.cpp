// Command line front end: kernel certificates, maximal-operator norms, the
// counterexample curve, bound estimation, stochastic checks and the acceptance suite.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "rlab/acceptance.hpp"
#include "rlab/admissibility.hpp"
#include "rlab/defaults.hpp"
#include "rlab/errors.hpp"
#include "rlab/family.hpp"
#include "rlab/maximal.hpp"
#include "rlab/rbound.hpp"
#include "rlab/rng.hpp"
#include "rlab/stochconv.hpp"

using namespace rlab;
using json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0, kFailure = 1, kConfig = 2;

struct GridOptions {
  double h = 0.0;
  double half_width = 0.0;

  Grid line() const {
    const double step = h > 0 ? h : defaults().h;
    const double w = half_width > 0 ? half_width : defaults().half_width;
    try {
      return Grid::line(-w, w, step);
    } catch (const Error& e) {
      throw ConfigError("grid", e.what());
    }
  }
};

json grid_json(const Grid& g) {
  return {{"dim", g.dim}, {"origin", g.origin[0]}, {"step", g.step}, {"cells", g.cells()}};
}

json base_report(const std::string& command, json config) {
  json r;
  r["command"] = command;
  r["version"] = RLAB_VERSION;
  r["config"] = std::move(config);
  return r;
}

void emit(const json& report, const std::string& out) {
  const std::string text = report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(out, std::ios::binary);
  if (!os) throw ConfigError("out", "cannot open " + out);
  os << text;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// check-kernel ---------------------------------------------------------------

int check_kernel(const std::vector<std::string>& kernels, int dim, const GridOptions& go, const std::string& out) {
  if (kernels.empty()) throw ConfigError("kernels", "kernel list is empty");
  if (dim != 1 && dim != 2) throw ConfigError("dim", "must be 1 or 2");
  const double h = go.h > 0 ? go.h : (dim == 1 ? 1.0 / 1024.0 : 1.0 / 32.0);
  const double w = go.half_width > 0 ? go.half_width : (dim == 1 ? 16.0 : 4.0);
  const auto radius = static_cast<Index>(std::llround(w / h));
  json results = json::array();
  for (const auto& s : kernels) {
    json r{{"kernel", s}};
    try {
      const Kernel k = Kernel::sample(ClosedForm::parse(s), dim, h, radius);
      r["l1_norm"] = l1_norm(k);
      json certs = json::array();
      for (Criterion c : {Criterion::RadialMajorant, Criterion::Gradient}) {
        try {
          const auto cert = certify(k, c);
          certs.push_back({{"criterion", to_string(c)}, {"bound_value", cert.bound_value}, {"passed", cert.passed}});
        } catch (const Error& e) {
          certs.push_back({{"criterion", to_string(c)}, {"error", e.what()}});
        }
      }
      if (k.closed_form() && k.closed_form()->one_sided()) {
        const auto cert = certify(k, Criterion::ClassSSquared);
        const auto cs = class_S_check(k);
        certs.push_back({{"criterion", to_string(Criterion::ClassSSquared)},
                         {"bound_value", cert.bound_value},
                         {"passed", cert.passed},
                         {"squared_bound", cs.squared_bound},
                         {"chain_holds", cs.chain_holds}});
      }
      r["certificates"] = certs;
    } catch (const Error& e) {
      r["error"] = e.what();
    }
    results.push_back(r);
  }
  json rep = base_report("check-kernel", {{"kernels", kernels}, {"dim", dim}, {"h", h}, {"half_width", w}});
  rep["results"] = results;
  emit(rep, out);
  return kOk;
}

// max-norm -------------------------------------------------------------------

int max_norm(const std::string& spec_text, const std::string& p_text, const std::string& radii, Index samples,
             std::uint64_t seed, const GridOptions& go, const std::string& out) {
  LatticeSpec spec;
  Exponent p(2.0);
  try {
    spec = LatticeSpec::parse(spec_text);
  } catch (const Error& e) {
    throw ConfigError("spec", e.what());
  }
  try {
    p = Exponent::parse(p_text);
  } catch (const Error& e) {
    throw ConfigError("p", e.what());
  }
  if (samples < 1) throw ConfigError("samples", "must be positive");
  const Grid g = go.line();
  const double width = g.step * static_cast<double>(g.cells());
  RadiusSet J = radii == "dense"    ? RadiusSet::dense(g.step, width)
                : radii == "dyadic" ? RadiusSet::dyadic(g.step, width)
                                    : throw ConfigError("radii", "expected dyadic or dense");
  Rng rng(derive_seed(seed, 2000));
  json rows = json::array();
  double best = 0.0;
  for (Index i = 0; i < samples; ++i) {
    // Random simple function: a few constant pieces.
    CellMatrix v = CellMatrix::Zero(g.cells(), spec.total_dim());
    const Index pieces = 1 + rng.below(4);
    for (Index q = 0; q < pieces; ++q) {
      const Index len = 1 + rng.below(std::max<Index>(1, g.cells() / 4));
      const Index start = rng.below(g.cells() - len + 1);
      Eigen::RowVectorXd val(spec.total_dim());
      for (Index j = 0; j < val.size(); ++j) val[j] = rng.normal();
      for (Index c = start; c < start + len; ++c) v.row(c) = val;
    }
    const double r = hl_operator_ratio(GridFunction(g, spec, std::move(v)), J, p);
    best = std::max(best, r);
    rows.push_back(r);
  }
  json rep = base_report("max-norm", {{"spec", spec.to_string()},
                                       {"p", p.to_string()},
                                       {"radii", radii},
                                       {"radius_count", J.size()},
                                       {"samples", samples},
                                       {"seed", seed},
                                       {"grid", grid_json(g)}});
  rep["ratios"] = rows;
  rep["max_ratio"] = best;
  emit(rep, out);
  return kOk;
}

// counterexample -------------------------------------------------------------

std::pair<int, int> parse_range(const std::string& s) {
  try {
    const auto dots = s.find("..");
    if (dots == std::string::npos) {
      const int n = std::stoi(s);
      return {n, n};
    }
    return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw ConfigError("N", "expected an integer or a range a..b, got '" + s + "'");
  }
}

int counterexample(const std::string& range, const std::string& out, const std::string& json_out) {
  const auto [lo, hi] = parse_range(range);
  const int cap = defaults().counterexample_max_n;
  if (lo < 1 || hi < lo || hi > cap)
    throw ConfigError("N", "range must lie in 1.." + std::to_string(cap) + " (RLAB_COUNTEREXAMPLE_MAX_N)");
  std::ostringstream csv;
  csv << std::setprecision(17) << "N,ratio,theoretical_lower_bound\n";
  json rows = json::array();
  for (int n = lo; n <= hi; ++n) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto inst = build_counterexample(n, true);
    const auto ev = evaluate_counterexample(inst, RadiusSet::dyadic(inst.grid.step, 2.0));
    csv << n << ',' << ev.ratio << ',' << ev.lower_bound << '\n';
    rows.push_back({{"N", n},
                    {"h", inst.grid.step},
                    {"f_norm", ev.f_norm},
                    {"maximal_norm", ev.maximal_norm},
                    {"ratio", ev.ratio},
                    {"theoretical_lower_bound", ev.lower_bound},
                    {"min_pointwise_sq", ev.window_min_sq}});
    std::cerr << "N=" << n << " ratio " << std::setprecision(6) << ev.ratio << " (" << std::fixed
              << std::setprecision(2) << elapsed(t0) << " s)\n"
              << std::defaultfloat;
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream os(out, std::ios::binary);
    if (!os) throw ConfigError("out", "cannot open " + out);
    os << csv.str();
  }
  if (!json_out.empty()) {
    json rep = base_report("counterexample", {{"N", range}, {"radii", "dyadic"}});
    rep["rows"] = rows;
    emit(rep, json_out);
  }
  return kOk;
}

// estimate -------------------------------------------------------------------

void write_witness(const std::string& path, const BoundEstimate& est) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("out", "cannot open " + path);
  os.write("RLWT", 4);
  const std::uint32_t version = 1;
  const auto members = static_cast<std::uint64_t>(est.witness.size());
  os.write(reinterpret_cast<const char*>(&version), sizeof version);
  os.write(reinterpret_cast<const char*>(&members), sizeof members);
  for (const auto& w : est.witness) {
    const auto idx = static_cast<std::uint64_t>(w.kernel);
    os.write(reinterpret_cast<const char*>(&idx), sizeof idx);
    write_binary(os, w.f);
  }
}

int estimate(const std::string& family_text, const std::string& space_text, const std::string& s_text,
             const std::string& flavor_text, const std::string& bound, Index budget, Index restarts,
             std::uint64_t seed, const GridOptions& go, const std::string& out) {
  const Grid g = go.line();
  const SpaceSpec space = SpaceSpec::parse(space_text, g);
  Exponent s(1.0);
  try {
    s = Exponent::parse(s_text);
  } catch (const Error& e) {
    throw ConfigError("s", e.what());
  }
  Flavor flavor;
  try {
    flavor = parse_flavor(flavor_text);
  } catch (const Error& e) {
    throw ConfigError("flavor", e.what());
  }
  if (bound != "ls" && bound != "R") throw ConfigError("bound", "expected ls or R");
  if (budget < 1) throw ConfigError("budget", "must be positive");
  const auto names = split_list(family_text);
  OperatorFamily fam = [&] {
    try {
      return OperatorFamily::from_strings(names, space, flavor);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("space", e.what());
    }
  }();
  SearchOptions opt;
  opt.budget = budget;
  opt.restarts = restarts;
  opt.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  const BoundEstimate est = bound == "ls" ? estimate_ls_bound(fam, s, opt) : estimate_R_bound(fam, opt);
  std::cerr << "estimate: " << est.value << " in " << std::fixed << std::setprecision(2) << elapsed(t0) << " s\n";

  json rep = base_report("estimate", {{"family", names},
                                       {"space", space.to_string()},
                                       {"domain", fam.domain().to_string()},
                                       {"s", s.to_string()},
                                       {"flavor", to_string(flavor)},
                                       {"bound", bound},
                                       {"budget", budget},
                                       {"restarts", est.restarts},
                                       {"seed", est.seed},
                                       {"grid", grid_json(g)}});
  json res{{"value", est.value},
           {"is_lower_bound", est.is_lower_bound},
           {"method", to_string(est.method)},
           {"iterations", est.iterations},
           {"best_restart", est.best_restart}};
  if (!out.empty()) {
    const std::string wpath = out + ".witness";
    write_witness(wpath, est);
    res["witness_path"] = wpath;
  }
  rep["result"] = res;
  emit(rep, out);
  return kOk;
}

// stoch ----------------------------------------------------------------------

int stoch(const std::string& kernel_text, Index paths, double dt, std::uint64_t seed, const std::string& check,
          double t, const std::string& space_text, Index budget, const std::string& out) {
  if (paths < 2) throw ConfigError("paths", "need at least two paths");
  if (!(dt > 0)) throw ConfigError("dt", "must be positive");
  const auto names = split_list(kernel_text);
  if (names.empty()) throw ConfigError("kernel", "kernel list is empty");
  json cfg{{"kernel", names}, {"paths", paths}, {"dt", dt}, {"seed", seed}, {"check", check}};
  json rep;
  if (check == "ito") {
    Grid g;
    try {
      g = Grid::line(0.0, 2.0, dt);
    } catch (const Error& e) {
      throw ConfigError("dt", e.what());
    }
    if (!(t > 0 && t <= 2.0)) throw ConfigError("t", "must lie in (0, 2]");
    const auto node = static_cast<Index>(std::llround(t / dt));
    cfg["t"] = static_cast<double>(node) * dt;
    rep = base_report("stoch", cfg);
    json rows = json::array();
    bool all = true;
    for (size_t i = 0; i < names.size(); ++i) {
      json r{{"kernel", names[i]}};
      try {
        const Kernel k = Kernel::sample(ClosedForm::parse(names[i]), 1, dt, g.cells());
        const std::vector<GridFunction> G = {GridFunction::from_function(
            g, LatticeSpec::scalar(), [](const double* x, double* o) { o[0] = x[0] < 1.0 ? 1.0 : 0.0; })};
        const auto ic = ito_check(k, G, node, paths, derive_seed(seed, 3000, i)).coords[0];
        r["variance"] = ic.variance;
        r["std_error"] = ic.std_error;
        r["analytic"] = ic.analytic;
        r["discrete"] = ic.discrete;
        r["mean"] = ic.mean;
        r["mean_error"] = ic.mean_error;
        r["passed"] = ic.variance_ok && ic.mean_ok;
        all &= ic.variance_ok && ic.mean_ok;
      } catch (const Error& e) {
        r["error"] = e.what();
        all = false;
      }
      rows.push_back(r);
    }
    rep["results"] = rows;
    rep["passed"] = all;
  } else if (check == "equiv") {
    Grid g;
    try {
      g = Grid::line(-2.0, 2.0, dt);
    } catch (const Error& e) {
      throw ConfigError("dt", e.what());
    }
    const SpaceSpec space = SpaceSpec::parse(space_text, g);
    std::vector<Kernel> ks;
    for (size_t i = 0; i < names.size(); ++i) {
      try {
        ks.push_back(Kernel::sample(ClosedForm::parse(names[i]), 1, dt, g.cells()));
      } catch (const Error& e) {
        throw ConfigError("kernel[" + std::to_string(i) + "]", e.what());
      }
    }
    cfg["space"] = space.to_string();
    cfg["budget"] = budget;
    rep = base_report("stoch", cfg);
    SearchOptions opt;
    opt.budget = budget;
    opt.seed = seed;
    opt.restarts = 3;
    try {
      const auto e = equivalence_experiment(ks, space, opt);
      rep["result"] = {{"A", e.A},
                       {"B", e.B},
                       {"sqrt_B", e.sqrtB},
                       {"ratio", e.ratio},
                       {"identity_deviation", e.identity_deviation}};
    } catch (const InvalidArgument& e) {
      throw ConfigError("space", e.what());
    }
  } else {
    throw ConfigError("check", "expected ito or equiv");
  }
  emit(rep, out);
  return kOk;
}

// verify ---------------------------------------------------------------------

int verify(std::uint64_t seed, const std::vector<std::string>& only, const std::vector<std::string>& tolerances,
           const std::string& out) {
  AcceptanceOptions opt;
  opt.seed = seed;
  for (const auto& o : only)
    for (const auto& key : split_list(o)) {
      const int id = criterion_id(key);
      if (id == 0) throw ConfigError("only", "unknown criterion '" + key + "'");
      opt.only.push_back(id);
    }
  for (const auto& t : tolerances) {
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("tolerance", "expected key=value, got '" + t + "'");
    try {
      opt.tolerances[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("tolerance." + t.substr(0, eq), "not a number");
    }
  }
  validate(opt);
  const auto results = run_acceptance(opt, [](const CriterionResult& r) {
    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << std::setw(2) << r.id << ' ' << std::left << std::setw(20)
              << r.name << std::right << std::fixed << std::setprecision(2) << std::setw(9) << r.seconds << " s\n"
              << std::defaultfloat << std::flush;
  });
  bool all = true;
  for (const auto& r : results) all &= r.passed;
  if (!out.empty()) emit(acceptance_report(opt, results), out);
  std::cout << (all ? "all criteria passed" : "some criteria failed") << '\n';
  return all ? kOk : kFailure;
}

int print_defaults() {
  json rows = json::array();
  for (const auto& e : defaults_table(defaults()))
    rows.push_back({{"name", e.name}, {"env", e.env}, {"value", e.value}, {"description", e.description}});
  std::cout << rows.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on R-boundedness of convolution families"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", std::string(RLAB_VERSION));
  app.require_subcommand(1);

  GridOptions go;
  auto add_grid = [&go](CLI::App* sub) {
    sub->add_option("--h", go.h, "Grid step (default from RLAB_H)");
    sub->add_option("--half-width", go.half_width, "Grid covers [-w, w) (default from RLAB_HALF_WIDTH)");
  };
  std::string out;

  auto* ck = app.add_subcommand("check-kernel", "Certificates for kernel strings such as exp:2 or ind:0:1");
  std::vector<std::string> kernels;
  int dim = 1;
  ck->add_option("kernels", kernels, "Kernel strings");
  ck->add_option("--dim", dim, "Dimension (1 or 2)");
  ck->add_option("--out", out, "JSON report path");
  add_grid(ck);

  auto* mn = app.add_subcommand("max-norm", "Ratios ||M f||_p / ||f||_p over random simple functions");
  std::string mspec = "l2(1)", mp = "2", radii = "dyadic";
  Index msamples = 20;
  std::uint64_t seed = 0;
  mn->add_option("--spec", mspec, "Lattice, e.g. l2(4,l4(2))");
  mn->add_option("--p", mp, "Exponent");
  mn->add_option("--radii", radii, "dyadic or dense");
  mn->add_option("--samples", msamples, "Number of random functions");
  mn->add_option("--seed", seed, "Seed");
  mn->add_option("--out", out, "JSON report path");
  add_grid(mn);

  auto* ce = app.add_subcommand("counterexample", "Maximal-operator ratios of the lattice counterexample");
  std::string range = "2..10", json_out;
  ce->add_option("--N", range, "N or a range a..b");
  ce->add_option("--out", out, "CSV path (stdout when omitted)");
  ce->add_option("--json", json_out, "Optional JSON report path");

  auto* es = app.add_subcommand("estimate", "Lower bound on the l^s- or R-bound of a kernel family");
  std::string family, space = "p=2,X=l2(1)", s_text = "1", flavor = "deterministic", bound = "ls";
  Index budget = 0, restarts = 0;
  es->add_option("--family", family, "Comma separated kernel strings")->required();
  es->add_option("--space", space, "Space, e.g. p=4,X=l2(8,l4(8))");
  es->add_option("--s", s_text, "Exponent s");
  es->add_option("--flavor", flavor, "deterministic or squared");
  es->add_option("--bound", bound, "ls or R");
  es->add_option("--budget", budget, "Evaluation budget");
  es->add_option("--restarts", restarts, "Random restarts");
  es->add_option("--seed", seed, "Seed");
  es->add_option("--out", out, "JSON report path; the witness goes to <out>.witness");
  add_grid(es);

  auto* st = app.add_subcommand("stoch", "Monte Carlo checks of stochastic convolutions");
  std::string skernel = "exp:2", check = "ito", sspace = "p=4,X=l2(4,l4(4))";
  Index paths = 0, sbudget = 600;
  double dt = 1.0 / 256.0, t = 1.5;
  st->add_option("--kernel", skernel, "Kernel string(s), comma separated");
  st->add_option("--paths", paths, "Number of paths (default from RLAB_PATHS)");
  st->add_option("--dt", dt, "Time step (equals the kernel grid step)");
  st->add_option("--seed", seed, "Seed");
  st->add_option("--check", check, "ito or equiv");
  st->add_option("--t", t, "Evaluation time for the ito check");
  st->add_option("--space", sspace, "Space for the equiv check");
  st->add_option("--budget", sbudget, "Search budget for the equiv check");
  st->add_option("--out", out, "JSON report path");

  auto* vf = app.add_subcommand("verify", "Run the acceptance suite");
  std::vector<std::string> only, tolerances;
  vf->add_option("--seed", seed, "Master seed");
  vf->add_option("--only", only, "Criteria by id or name");
  vf->add_option("--tolerance", tolerances, "Override a threshold, key=value");
  vf->add_option("--out", out, "JSON report path");

  auto* df = app.add_subcommand("defaults", "Print the defaults table and environment overrides");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  const std::uint64_t resolved_seed = seed != 0 ? seed : defaults().seed;
  try {
    if (*ck) return check_kernel(kernels, dim, go, out);
    if (*mn) return max_norm(mspec, mp, radii, msamples, resolved_seed, go, out);
    if (*ce) return counterexample(range, out, json_out);
    if (*es) return estimate(family, space, s_text, flavor, bound, budget, restarts, resolved_seed, go, out);
    if (*st)
      return stoch(skernel, paths > 0 ? paths : defaults().paths, dt, resolved_seed, check, t, sspace, sbudget, out);
    if (*vf) return verify(resolved_seed, only, tolerances, out);
    if (*df) return print_defaults();
  } catch (const ConfigError& e) {
    std::cerr << json{{"error", {{"field", e.field()}, {"message", e.what()}}}}.dump() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"message", e.what()}}}}.dump() << '\n';
    return kFailure;
  }
  return kConfig;
}
