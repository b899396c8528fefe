#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <string>

#include "alab/error.hpp"
#include "alab/scenario.hpp"

using namespace alab;

namespace {

const std::string kDir = ALAB_SCENARIO_DIR;

const char* kMinimal = R"({
  "name": "minimal",
  "manifolds": {"R2": {"dim": 2}},
  "algebroids": {"T": {"type": "tangent", "chart": "R2"}},
  "checks": [{"kind": "algebroid_axioms", "target": "T"}]
})";

}  // namespace

TEST_CASE("minimal scenario") {
  auto s = parse_scenario(kMinimal);
  CHECK(s.name == "minimal");
  REQUIRE(s.checks.size() == 1);
  CHECK(s.checks[0].id == "algebroid_axioms:T");
  auto r = run_checks(s);
  CHECK(r.exit_code() == 0);
  CHECK(r.reports[0].status == Status::Pass);
  CHECK(r.reports[0].tolerance == 1e-8);
  CHECK(r.reports[0].ms == 0.0);

  auto empty = run_checks(parse_scenario(R"({"name": "empty", "checks": []})"));
  CHECK(empty.reports.empty());
  CHECK(empty.exit_code() == 0);
  CHECK(run_checks(parse_scenario("{}")).exit_code() == 0);
}

TEST_CASE("load errors") {
  std::string unknown = R"({
    "manifolds": {"R2": {"dim": 2}},
    "checks": [{"kind": "algebroid_axioms", "target": "ghost"}]
  })";
  CHECK_THROWS_WITH_AS(parse_scenario(unknown), doctest::Contains("UnresolvedLabel"), Error);
  CHECK_THROWS_WITH_AS(parse_scenario(unknown), doctest::Contains("'ghost'"), Error);

  std::string dangling = R"({"algebroids": {"T": {"type": "tangent", "chart": "nowhere"}}})";
  CHECK_THROWS_WITH_AS(parse_scenario(dangling), doctest::Contains("'nowhere'"), Error);

  // The second comma sits at offset 13; the parser reports 1-based offsets.
  try {
    parse_scenario(R"({"name": "x",, "checks": []})");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 14);
    CHECK(std::string(e.what()).find("ParseError") == 0);
  }

  std::string bad_expr = R"({
    "manifolds": {"R2": {"dim": 2}},
    "vector_fields": {"v": {"chart": "R2", "components": ["x1 +* 2", "0"]}}
  })";
  CHECK_THROWS_WITH_AS(parse_scenario(bad_expr), doctest::Contains("vector_fields.v"), ParseError);
  std::string bad_var = R"({
    "manifolds": {"R2": {"dim": 2, "coordinates": ["p", "q"]}},
    "vector_fields": {"v": {"chart": "R2", "components": ["x1", "0"]}}
  })";
  CHECK_THROWS_AS(parse_scenario(bad_var), ParseError);

  std::string cycle = R"({
    "manifolds": {"R2": {"dim": 2}},
    "algebroids": {"T": {"type": "tangent", "chart": "R2"}},
    "paths": {"a": {"concatenate": ["b"]}, "b": {"concatenate": ["a"]}}
  })";
  CHECK_THROWS_WITH_AS(parse_scenario(cycle), doctest::Contains("cyclic"), Error);
  CHECK_THROWS_WITH_AS(parse_scenario(R"({"widgets": {}})"), doctest::Contains("SchemaViolation"), Error);
  CHECK_THROWS_WITH_AS(parse_scenario(R"({"checks": [{"kind": "telepathy"}]})"), doctest::Contains("telepathy"), Error);
  CHECK_THROWS_WITH_AS(parse_scenario("[]"), doctest::Contains("SchemaViolation"), Error);
  std::string short_field = R"({
    "manifolds": {"R2": {"dim": 2}},
    "vector_fields": {"v": {"chart": "R2", "components": ["1"]}}
  })";
  CHECK_THROWS_WITH_AS(parse_scenario(short_field), doctest::Contains("expected 2"), Error);
  CHECK_THROWS_WITH_AS(load_scenario(kDir + "/missing.json"), doctest::Contains("cannot read"), Error);
}

TEST_CASE("bundled fixtures") {
  auto dual = load_scenario(kDir + "/dual_pair.json");
  CHECK(dual.checks.size() == 6);
  auto r = run_checks(dual);
  CHECK(r.exit_code() == 0);
  for (const auto& rep : r.reports) CHECK_MESSAGE(rep.status == Status::Pass, rep.id);

  auto gauge = run_checks(load_scenario(kDir + "/nonclosed_gauge.json"));
  CHECK(gauge.exit_code() == 1);
  REQUIRE(gauge.reports.size() == 2);
  CHECK(gauge.reports[0].status == Status::Pass);
  CHECK(gauge.reports[1].status == Status::Fail);
  CHECK(gauge.reports[1].component("involutivity") > 0.1);

  auto lift = run_checks(load_scenario(kDir + "/broken_lift.json"));
  CHECK(lift.exit_code() == 2);
  REQUIRE(lift.reports.size() == 2);
  CHECK(lift.reports[0].status == Status::Pass);
  CHECK(lift.reports[1].status == Status::Error);
  CHECK(lift.reports[1].message.find("IntersectionNontrivial") != std::string::npos);

  auto tour = load_scenario(kDir + "/tour.json");
  auto t = run_checks(tour);
  CHECK(t.exit_code() == 0);
  for (const auto& rep : t.reports) CHECK_MESSAGE(rep.status == Status::Pass, rep.id);
  std::set<std::string> kinds;
  for (const auto& c : tour.checks) kinds.insert(c.kind);
  CHECK(kinds.size() == 19);
}

TEST_CASE("option precedence") {
  std::string text = R"({
    "manifolds": {"R2": {"dim": 2}, "R1": {"dim": 1}},
    "algebroids": {"T": {"type": "tangent", "chart": "R2"}, "T1": {"type": "tangent", "chart": "R1"}},
    "actions": {"m": {"type": "canonical", "algebroid": "T1"}},
    "paths": {"p": {"algebroid": "T1", "coefficients": ["1"], "base": ["t"]}},
    "checks": [
      {"kind": "algebroid_axioms", "target": "T", "tolerance": 1e-3, "samples": 5},
      {"kind": "algebroid_axioms", "target": "T"},
      {"kind": "apath_integrate", "target": "p", "action": "m", "x0": [0], "expect": [1]}
    ]
  })";
  auto s = parse_scenario(text);
  auto plain = run_checks(s);
  CHECK(plain.reports[0].tolerance == 1e-3);
  CHECK(plain.reports[1].tolerance == 1e-8);
  CHECK(plain.reports[2].tolerance == 1e-6);
  CHECK(plain.exit_code() == 0);

  RunOptions o;
  o.tolerance = 1e-5;
  o.seed = 9;
  auto over = run_checks(s, o);
  CHECK(over.reports[0].tolerance == 1e-3);
  CHECK(over.reports[1].tolerance == 1e-5);
  CHECK(over.reports[2].tolerance == 1e-5);
  CHECK(over.reports[1].worst_point != plain.reports[1].worst_point);

  o.timing = true;
  CHECK(run_checks(s, o).reports[1].ms >= 0.0);
}

TEST_CASE("reports are deterministic and round-trip") {
  auto s = load_scenario(kDir + "/tour.json");
  auto first = to_json(run_checks(s)).dump(2);
  auto second = to_json(run_checks(s)).dump(2);
  CHECK(first == second);
  RunOptions par;
  par.jobs = 4;
  CHECK(to_json(run_checks(s, par)).dump(2) == first);

  auto parsed = run_result_from_json(nlohmann::json::parse(first));
  CHECK(to_json(parsed).dump(2) == first);

  auto lift = run_checks(load_scenario(kDir + "/broken_lift.json"));
  auto ltext = to_json(lift).dump();
  CHECK(to_json(run_result_from_json(nlohmann::json::parse(ltext))).dump() == ltext);
  CHECK_THROWS_AS(run_result_from_json(nlohmann::json::parse(R"({"reports": []})")), Error);

  auto text = to_text(lift);
  CHECK(text.find("2 checks: 1 pass, 0 fail, 0 inconclusive, 1 error") != std::string::npos);
}
