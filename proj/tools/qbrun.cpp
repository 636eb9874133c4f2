#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qb/runner.hpp"
#include "qb/sequences.hpp"

namespace {

int write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << "cannot open " << path << " for writing\n";
    return 2;
  }
  out << content;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scenario-driven verification runner for frame and quasi-basis perturbations"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::string csv_path;
  bool with_timings = false;
  auto* run_cmd = app.add_subcommand("run", "execute a scenario file and emit a report");
  run_cmd->add_option("file", scenario_path, "scenario JSON file")->required();
  run_cmd->add_option("--out", out_path, "write the JSON report to this path");
  run_cmd->add_option("--csv", csv_path, "write the flat CSV report to this path");
  run_cmd->add_flag("--timings", with_timings,
                    "record wall-clock runtimes (reports are no longer byte-stable)");

  std::string scan_path;
  double scan_from = 0.0;
  double scan_to = 0.0;
  int scan_steps = 0;
  std::string scan_out;
  auto* scan_cmd =
      app.add_subcommand("scan-lambda", "tabulate the contraction constant over a lambda grid");
  scan_cmd->add_option("file", scan_path, "scenario JSON file")->required();
  scan_cmd->add_option("--from", scan_from, "first lambda value")->required();
  scan_cmd->add_option("--to", scan_to, "last lambda value")->required();
  scan_cmd->add_option("--steps", scan_steps, "number of grid points")->required();
  scan_cmd->add_option("--out", scan_out, "write the CSV table to this path");

  auto* list_cmd = app.add_subcommand("list-models", "print the scenario model registry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) {
      qb::Scenario scenario = qb::load_scenario(scenario_path);
      qb::Report report = qb::run_scenario(scenario, with_timings);
      std::string json = report.to_json().dump(2) + "\n";
      if (!out_path.empty()) {
        if (int rc = write_file(out_path, json)) return rc;
      } else {
        std::cout << json;
      }
      if (!csv_path.empty())
        if (int rc = write_file(csv_path, report.to_csv())) return rc;
      for (const auto& record : report.records)
        std::cerr << "[" << record.status << "] " << record.name
                  << " measured=" << qb::format_real(record.measured)
                  << " bound=" << qb::format_real(record.bound) << "\n";
      return report.exit_code();
    }

    if (scan_cmd->parsed()) {
      qb::Scenario scenario = qb::load_scenario(scan_path);
      auto rows = qb::scan_lambda(scenario, scan_from, scan_to, scan_steps);
      std::string csv = qb::lambda_scan_csv(rows);
      if (!scan_out.empty()) {
        if (int rc = write_file(scan_out, csv)) return rc;
      } else {
        std::cout << csv;
      }
      bool any_fail = false;
      for (const auto& row : rows) any_fail = any_fail || !row.verdict;
      return any_fail ? 1 : 0;
    }

    if (list_cmd->parsed()) {
      for (const auto& model : qb::list_models()) {
        std::cout << model.name << "\n  params: " << model.params_help
                  << "\n  anchor: " << model.anchor << "\n";
      }
      return 0;
    }
  } catch (const qb::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const qb::ToolkitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
