#include "qb/scenario.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "qb/sequences.hpp"

namespace qb {

namespace {

double parse_decimal_string(const Json& v, const std::string& context) {
  if (!v.is_string())
    throw SchemaError("scenario: real-valued field '" + context +
                      "' must be a decimal string");
  const std::string s = v.get<std::string>();
  char* end = nullptr;
  double out = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw SchemaError("scenario: cannot parse decimal string '" + s + "' for '" + context + "'");
  return out;
}

const std::set<std::string>& known_models() {
  static const std::set<std::string> models = {
      "rank_one",       "weighted_onb", "shifted_oscillator",      "christensen",
      "counterexample", "lower_semiframe", "multiplier_distribution"};
  return models;
}

const std::set<std::string>& known_conditions() {
  static const std::set<std::string> conditions = {
      "none",         "L12_frame",    "L13_coeff",    "T21_strong",   "C25_split",
      "C28_bessel_1", "C28_bessel_2", "C28_norm_sum", "T31_weak",     "T32_subspace",
      "C210_coeff_dual"};
  return conditions;
}

}  // namespace

double parse_decimal_field(const Json& j, const std::string& key) {
  if (!j.contains(key)) throw SchemaError("scenario: missing field '" + key + "'");
  return parse_decimal_string(j.at(key), key);
}

double parse_decimal_field(const Json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  return parse_decimal_string(j.at(key), key);
}

Scenario parse_scenario_json(const Json& j) {
  Scenario s;
  try {
    if (!j.is_object()) throw SchemaError("scenario: document must be an object");
    for (const char* field : {"name", "space", "model", "checks", "seed"})
      if (!j.contains(field)) throw SchemaError(std::string("scenario: missing field '") + field + "'");

    s.name = j.at("name").get<std::string>();
    s.space = j.at("space");
    if (!s.space.contains("kind")) throw SchemaError("scenario: space needs a 'kind'");
    const std::string kind = s.space.at("kind").get<std::string>();
    if (kind != "abstract" && kind != "hermite-grid")
      throw SchemaError("scenario: unknown space kind '" + kind + "'");

    const Json& model = j.at("model");
    s.model = model.at("name").get<std::string>();
    if (!known_models().count(s.model))
      throw SchemaError("scenario: unknown model '" + s.model + "'");
    s.model_params = model.value("params", Json::object());

    if (j.contains("perturbation")) {
      const Json& pert = j.at("perturbation");
      s.condition = pert.value("condition", "none");
      if (!known_conditions().count(s.condition))
        throw SchemaError("scenario: unknown condition '" + s.condition + "'");
      if (pert.contains("lambda")) {
        const Json& lam = pert.at("lambda");
        if (lam.is_array()) {
          if (lam.size() != 2) throw SchemaError("scenario: lambda array must be [re, im]");
          s.lambda = Complex(parse_decimal_string(lam.at(0), "lambda.re"),
                             parse_decimal_string(lam.at(1), "lambda.im"));
        } else {
          s.lambda = Complex(parse_decimal_string(lam, "lambda"), 0.0);
        }
      }
      if (s.lambda == Complex(0.0, 0.0))
        throw SchemaError("scenario: lambda must be nonzero");
    }

    for (const Json& c : j.at("checks")) {
      ScenarioCheck check;
      check.name = c.at("name").get<std::string>();
      check.bound = parse_decimal_string(c.at("bound"), "checks." + check.name + ".bound");
      check.expect_fail = c.value("expect_fail", false);
      check.params = c.value("params", Json::object());
      s.checks.push_back(std::move(check));
    }
    if (s.checks.empty()) throw SchemaError("scenario: needs at least one check");

    if (j.contains("tolerances"))
      for (auto it = j.at("tolerances").begin(); it != j.at("tolerances").end(); ++it)
        s.tolerances[it.key()] = parse_decimal_string(it.value(), "tolerances." + it.key());

    if (!j.at("seed").is_number_integer()) throw SchemaError("scenario: seed must be an integer");
    s.seed = j.at("seed").get<std::uint64_t>();
    s.test_count = j.value("test_count", 20);
    if (s.test_count < 1) throw SchemaError("scenario: test_count must be positive");
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("scenario: ") + e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open scenario file " + path);
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("scenario parse: ") + e.what());
  }
  return parse_scenario_json(j);
}

int Report::exit_code() const {
  bool any_fail = false;
  for (const auto& record : records) {
    if (record.status == "error") return 2;
    if (record.status == "fail") any_fail = true;
  }
  return any_fail ? 1 : 0;
}

Json Report::to_json() const {
  Json j;
  j["report_format"] = "qb-report-v1";
  j["scenario"] = scenario_name;
  j["seed"] = seed;
  j["model_anchor"] = model_anchor;
  Json checks = Json::array();
  for (const auto& record : records) {
    Json c;
    c["name"] = record.name;
    c["status"] = record.status;
    c["measured"] = format_real(record.measured);
    c["bound"] = format_real(record.bound);
    c["runtime_ms"] = record.runtime_ms;
    c["anchor"] = record.anchor;
    if (!record.curve.empty()) {
      Json curve = Json::array();
      for (const auto& [idx, value] : record.curve)
        curve.push_back(Json::array({idx, format_real(value)}));
      c["curve"] = std::move(curve);
    }
    checks.push_back(std::move(c));
  }
  j["checks"] = std::move(checks);
  Json certs = Json::array();
  for (const auto& cert : certificates) certs.push_back(Json::parse(cert));
  j["certificates"] = std::move(certs);
  return j;
}

std::string Report::to_csv() const {
  std::string out = "check,index,measured,bound,status,anchor\n";
  for (const auto& record : records) {
    out += record.name + "," + "," + format_real(record.measured) + "," +
           format_real(record.bound) + "," + record.status + ",\"" + record.anchor + "\"\n";
    for (const auto& [idx, value] : record.curve)
      out += record.name + "," + std::to_string(idx) + "," + format_real(value) + "," +
             format_real(record.bound) + ",,\n";
  }
  return out;
}

}  // namespace qb
