#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qb/linalg.hpp"

namespace qb {

using Json = nlohmann::ordered_json;

/// One requested diagnostic: a named check with a pass bound. Checks marked
/// expect_fail assert the negative (the raw check must miss its bound).
struct ScenarioCheck {
  std::string name;
  double bound = 0.0;
  bool expect_fail = false;
  Json params;  // check-specific knobs, numeric values as decimal strings
};

/// Declarative description of one verification run. Real-valued parameters
/// are decimal strings in the file so that parsing is bit-stable.
struct Scenario {
  std::string name;
  Json space;          // {"kind":"abstract","dim":N} or {"kind":"hermite-grid","nodes":M}
  std::string model;
  Json model_params;
  std::string condition = "none";
  Complex lambda{1.0, 0.0};
  std::vector<ScenarioCheck> checks;
  std::map<std::string, double> tolerances;
  std::uint64_t seed = 0;
  int test_count = 20;
};

/// Parses and validates a scenario document. Throws SchemaError on malformed
/// input, unknown model/check/condition names, raw (non-string) real literals
/// or lambda = 0.
Scenario parse_scenario_json(const Json& j);
Scenario load_scenario(const std::string& path);

/// Reads a decimal-string real; raw JSON numbers are rejected to keep file
/// parsing bit-stable.
double parse_decimal_field(const Json& j, const std::string& key);
double parse_decimal_field(const Json& j, const std::string& key, double fallback);

struct CheckRecord {
  std::string name;
  std::string status;  // pass | fail | error
  double measured = 0.0;
  double bound = 0.0;
  long runtime_ms = 0;
  std::string anchor;
  std::vector<std::pair<int, double>> curve;  // optional residual-vs-N data
};

struct Report {
  std::string scenario_name;
  std::uint64_t seed = 0;
  std::vector<CheckRecord> records;
  std::vector<std::string> certificates;  // serialized certificate JSON strings
  std::string model_anchor;

  int exit_code() const;            ///< 0 all pass, 1 any fail, 2 any error
  Json to_json() const;             ///< canonical (deterministic) rendering
  std::string to_csv() const;       ///< flat rows, curve checks expanded by index
};

}  // namespace qb
