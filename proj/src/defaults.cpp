#include "rlab/defaults.hpp"

#include <cstdlib>
#include <sstream>
#include <thread>

#include "rlab/errors.hpp"

namespace rlab {

namespace {

template <class T>
void read(const std::function<std::string(const std::string&)>& lookup, const char* name, T& field) {
  const std::string env = std::string("RLAB_") + name;
  const std::string text = lookup(env);
  if (text.empty()) return;
  std::istringstream is(text);
  T v{};
  is >> v;
  if (!is || !is.eof()) throw ConfigError(env, "cannot parse '" + text + "'");
  field = v;
}

template <class T>
std::string show(T v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

Defaults load_defaults(const std::function<std::string(const std::string&)>& lookup) {
  Defaults d;
  read(lookup, "H", d.h);
  read(lookup, "HALF_WIDTH", d.half_width);
  read(lookup, "MAX_CELLS", d.max_cells);
  read(lookup, "FFT_THRESHOLD", d.fft_threshold);
  read(lookup, "EXACT_MAX_TERMS", d.exact_max_terms);
  read(lookup, "MC_SAMPLES", d.mc_samples);
  read(lookup, "RESTARTS", d.restarts);
  read(lookup, "BUDGET", d.budget);
  read(lookup, "PATHS", d.paths);
  read(lookup, "SEED", d.seed);
  read(lookup, "THREADS", d.threads);
  read(lookup, "TAIL_TOLERANCE", d.tail_tolerance);
  read(lookup, "COUNTEREXAMPLE_MAX_N", d.counterexample_max_n);
  if (!(d.h > 0)) throw ConfigError("RLAB_H", "must be positive");
  if (d.exact_max_terms > 24) throw ConfigError("RLAB_EXACT_MAX_TERMS", "must be <= 24");
  return d;
}

const Defaults& defaults() {
  static const Defaults d = load_defaults([](const std::string& name) {
    const char* v = std::getenv(name.c_str());
    return v ? std::string(v) : std::string();
  });
  return d;
}

std::vector<DefaultEntry> defaults_table(const Defaults& d) {
  return {
      {"h", "RLAB_H", show(d.h), "grid step"},
      {"half_width", "RLAB_HALF_WIDTH", show(d.half_width), "default box is [-half_width, half_width)"},
      {"max_cells", "RLAB_MAX_CELLS", show(d.max_cells), "memory cap on grid cells"},
      {"fft_threshold", "RLAB_FFT_THRESHOLD", show(d.fft_threshold), "cells per axis above which convolution uses the FFT"},
      {"exact_max_terms", "RLAB_EXACT_MAX_TERMS", show(d.exact_max_terms), "largest sign sum evaluated by enumeration"},
      {"mc_samples", "RLAB_MC_SAMPLES", show(d.mc_samples), "Monte Carlo samples for random sums"},
      {"restarts", "RLAB_RESTARTS", show(d.restarts), "random restarts of the witness search"},
      {"budget", "RLAB_BUDGET", show(d.budget), "witness search budget (member image evaluations)"},
      {"paths", "RLAB_PATHS", show(d.paths), "Brownian paths per stochastic experiment"},
      {"seed", "RLAB_SEED", show(d.seed), "master seed"},
      {"threads", "RLAB_THREADS", show(d.threads), "worker threads, 0 = hardware concurrency"},
      {"tail_tolerance", "RLAB_TAIL_TOLERANCE", show(d.tail_tolerance), "kernel mass tolerated outside a sampled box"},
      {"counterexample_max_n", "RLAB_COUNTEREXAMPLE_MAX_N", show(d.counterexample_max_n), "largest counterexample scale"},
  };
}

int worker_count() {
  if (defaults().threads > 0) return defaults().threads;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace rlab
