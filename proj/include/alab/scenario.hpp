#pragma once

// JSON scenarios: named declarations plus an ordered list of checks.
//
// Declarations are resolved on demand by label, with cycle detection, and
// every check target is resolved at load time so a loaded scenario never
// fails on a missing label later. The schema is described in README.md.

#include <filesystem>
#include <functional>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "alab/report.hpp"

namespace alab {

struct ScenarioCheck {
  std::string id;
  std::string kind;
  std::optional<double> tolerance;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  double default_tolerance = 1e-8;
  std::function<CheckReport(const CheckOptions&)> run;
};

struct Scenario {
  std::string name;
  std::vector<ScenarioCheck> checks;
  std::shared_ptr<const void> state;  // keeps resolved declarations alive
};

/// Throws ParseError, UnresolvedLabel, SchemaViolation, and any
/// construction error raised while resolving declarations.
Scenario parse_scenario(const std::string& text, const std::string& name = "scenario");
Scenario load_scenario(const std::filesystem::path& path);

/// Overrides applied to checks that do not pin their own values.
struct RunOptions {
  std::optional<double> tolerance;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  bool timing = false;
  int jobs = 1;
};

struct RunResult {
  std::string scenario;
  std::vector<CheckReport> reports;
  int exit_code() const;
};

/// Runs checks in declared order (or on `jobs` workers, collected in order).
/// Errors become status=error reports.
RunResult run_checks(const Scenario& s, const RunOptions& opt = {});

nlohmann::json to_json(const RunResult& r);
RunResult run_result_from_json(const nlohmann::json& j);
std::string to_text(const RunResult& r);

}  // namespace alab
