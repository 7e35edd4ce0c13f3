#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace rlab {

/// Every tunable default lives here. Each entry may be overridden by an
/// environment variable named RLAB_<NAME> (see defaults_table()).
struct Defaults {
  double h = 1.0 / 1024.0;          // grid step
  double half_width = 2.0;          // default box [-half_width, half_width)
  Eigen::Index max_cells = Eigen::Index(1) << 22;
  Eigen::Index fft_threshold = 4096;  // cells per axis above which convolution uses the FFT
  Eigen::Index exact_max_terms = 14;  // exact sign enumeration up to this many terms
  Eigen::Index mc_samples = 100000;
  Eigen::Index restarts = 20;
  Eigen::Index budget = 20000;
  Eigen::Index paths = 10000;
  std::uint64_t seed = 7;
  int threads = 0;                  // 0 means hardware concurrency
  double tail_tolerance = 1e-8;     // tolerated kernel mass outside a sampled box
  int counterexample_max_n = 12;
};

struct DefaultEntry {
  std::string name;
  std::string env;
  std::string value;
  std::string description;
};

/// Process-wide defaults, read once from the environment.
const Defaults& defaults();
/// Builds defaults from an arbitrary lookup (used by tests); lookup returns "" when unset.
Defaults load_defaults(const std::function<std::string(const std::string&)>& lookup);
std::vector<DefaultEntry> defaults_table(const Defaults& d);
int worker_count();

}  // namespace rlab
