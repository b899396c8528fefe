#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "alab/error.hpp"
#include "alab/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Lie algebroid and Dirac structure checks"};
  app.require_subcommand(1);

  auto* check = app.add_subcommand("check", "run the checks of a JSON scenario");
  std::string file;
  std::optional<double> tolerance;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::string format = "text";
  std::string out;
  bool timing = false;
  int jobs = 1;
  check->add_option("scenario", file, "scenario file")->required();
  check->add_option("--tolerance", tolerance, "tolerance for checks that do not set one");
  check->add_option("--samples", samples, "sample count for checks that do not set one")->check(CLI::PositiveNumber);
  check->add_option("--seed", seed, "seed for checks that do not set one");
  check->add_option("--report", format, "json or text")->check(CLI::IsMember({"json", "text"}));
  check->add_option("--out", out, "write the report here instead of stdout");
  check->add_flag("--timing", timing, "record wall time per check (makes reports nondeterministic)");
  check->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  alab::Scenario scenario;
  try {
    scenario = alab::load_scenario(file);
  } catch (const std::exception& e) {
    std::cerr << "algebroid-lab: " << e.what() << "\n";
    return 2;
  }

  alab::RunOptions opt{tolerance, samples, seed, timing, jobs};
  alab::RunResult result = alab::run_checks(scenario, opt);
  std::string text = format == "json" ? alab::to_json(result).dump(2) + "\n" : alab::to_text(result);

  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) {
      std::cerr << "algebroid-lab: cannot write " << out << "\n";
      return 2;
    }
    f << text;
  }
  return result.exit_code();
}
