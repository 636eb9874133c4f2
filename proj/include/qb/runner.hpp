#pragma once

#include <optional>

#include "qb/scenario.hpp"

namespace qb {

/// Executes every check of a scenario and assembles the report. Timing fields
/// are zero unless with_timings is set, which keeps default reports
/// byte-identical across runs.
Report run_scenario(const Scenario& scenario, bool with_timings = false);

struct LambdaScanRow {
  double lambda = 0.0;
  double alpha = 0.0;
  bool verdict = false;
};

/// Measures the contraction constant of the scenario's mixed operator over a
/// lambda grid. No optimality claim; zero is rejected by the schema.
std::vector<LambdaScanRow> scan_lambda(const Scenario& scenario, double from, double to,
                                       int steps);
std::string lambda_scan_csv(const std::vector<LambdaScanRow>& rows);

struct ModelInfo {
  std::string name;
  std::string params_help;
  std::string anchor;
};

std::vector<ModelInfo> list_models();

}  // namespace qb
