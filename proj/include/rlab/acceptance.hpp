#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace rlab {

struct AcceptanceOptions {
  std::uint64_t seed = 7;
  /// Criterion ids to run; empty runs all twelve.
  std::vector<int> only;
  /// Overrides of entries in acceptance_tolerances().
  std::map<std::string, double> tolerances;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  nlohmann::ordered_json detail;
  double seconds = 0.0;  // wall time; never serialised into reports
};

/// Named thresholds used by the acceptance criteria, with their default values.
const std::map<std::string, double>& acceptance_tolerances();
/// Short names ("counterexample", "duality", ...) indexed by id - 1.
const std::vector<std::string>& criterion_names();
/// Resolves "3" or "class-s"; returns 0 when unknown.
int criterion_id(std::string_view key);

/// Throws ConfigError for unknown criteria or tolerance keys.
void validate(const AcceptanceOptions& opt);

/// Runs the selected criteria in id order; `progress` sees each result as it completes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                            const std::function<void(const CriterionResult&)>& progress = {});

/// Report without wall times, so equal inputs give byte-identical output.
nlohmann::ordered_json acceptance_report(const AcceptanceOptions& opt, const std::vector<CriterionResult>& results);

}  // namespace rlab
