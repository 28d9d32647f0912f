#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "app/runner.hpp"
#include "app/scenario.hpp"

using namespace memincl::app;

namespace {

Scenario load(const std::string& path, const std::vector<std::string>& overrides, std::optional<std::uint64_t> seed,
              std::optional<double> tol_newton, std::optional<double> tol_fp) {
  json doc = load_document(path);
  for (const auto& o : overrides) {
    apply_override(doc, o);
  }
  if (seed) doc["seed"] = *seed;
  if (tol_newton) doc["solver"]["tol_newton"] = *tol_newton;
  if (tol_fp) doc["solver"]["tol_fp"] = *tol_fp;
  return build_scenario(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memory-coupled evolution inclusions: solve, certify, check, sweep"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_newton;
  std::optional<double> tol_fp;
  std::string parameter;
  std::vector<double> values;
  std::size_t jobs = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    sub->add_option("--set", overrides, "Override a key, e.g. --set memory.lambda_per_time=10");
    sub->add_option("--seed", seed, "Checker seed");
    sub->add_option("--tol-newton", tol_newton, "Newton tolerance");
    sub->add_option("--tol-fp", tol_fp, "Fixed-point tolerance");
  };

  CLI::App* run = app.add_subcommand("run", "Solve a scenario and write trajectories and reports");
  add_common(run);
  run->add_option("--out", out_dir, "Output directory");

  CLI::App* check = app.add_subcommand("check", "Run the assumption checkers");
  add_common(check);

  CLI::App* sw = app.add_subcommand("sweep", "Independent runs over one parameter");
  add_common(sw);
  sw->add_option("--out", out_dir, "Output directory");
  sw->add_option("--param", parameter, "lambda, tau, p or s")->required();
  sw->add_option("--values", values, "Parameter values")->required()->delimiter(',');
  sw->add_option("--jobs", jobs, "Parallel runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitParse;
  }

  try {
    if (*run) {
      const Scenario sc = load(scenario_path, overrides, seed, tol_newton, tol_fp);
      const RunArtifacts art = run_scenario(sc, std::filesystem::path(out_dir));
      std::cout << sc.name << ": " << summary_line(art.summary) << "\n";
      if (!art.summary.message.empty()) {
        std::cerr << art.summary.message << "\n";
      }
      return art.summary.exit_code;
    }
    if (*check) {
      const Scenario sc = load(scenario_path, overrides, seed, tol_newton, tol_fp);
      return check_scenario(sc, std::cout);
    }
    if (*sw) {
      json doc = load_document(scenario_path);
      for (const auto& o : overrides) {
        apply_override(doc, o);
      }
      if (seed) doc["seed"] = *seed;
      if (tol_newton) doc["solver"]["tol_newton"] = *tol_newton;
      if (tol_fp) doc["solver"]["tol_fp"] = *tol_fp;
      const auto rows = sweep(doc, parameter, values, out_dir, jobs);
      bool all = true;
      for (const auto& r : rows) {
        std::cout << parameter << "=" << r.value << ": " << summary_line(r.summary) << "\n";
        if (!r.summary.message.empty()) {
          std::cerr << parameter << "=" << r.value << ": " << r.summary.message << "\n";
        }
        all = all && r.summary.exit_code == kExitOk;
      }
      return all ? kExitOk : kExitCertificate;
    }
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolve;
  }
  return kExitOk;
}
