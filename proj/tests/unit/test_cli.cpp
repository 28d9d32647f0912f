#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "app/io.hpp"
#include "app/runner.hpp"
#include "app/scenario.hpp"

namespace fs = std::filesystem;
using namespace memincl;
using namespace memincl::app;

namespace {

const fs::path kScenarios{MEMINCL_SCENARIO_DIR};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("memincl_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(MEMINCL_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario scenario(const std::string& file, const std::vector<std::string>& overrides = {}) {
  json doc = load_document((kScenarios / file).string());
  for (const auto& o : overrides) apply_override(doc, o);
  return build_scenario(doc);
}

}  // namespace

TEST_CASE("bundled scenarios run and certify") {
  for (const auto& entry : fs::directory_iterator(kScenarios)) {
    CAPTURE(entry.path().string());
    const Scenario sc = build_scenario(load_document(entry.path().string()));
    const RunArtifacts art = run_scenario(sc, std::nullopt);
    CHECK(art.summary.exit_code == kExitOk);
    CHECK(art.summary.certified);
    REQUIRE(art.summary.min_apriori_margin.has_value());
    CHECK(*art.summary.min_apriori_margin > 0.0);
  }
}

TEST_CASE("run writes reproducible artifacts") {
  const fs::path dir = scratch("run");
  const std::string sc = (kScenarios / "heat-memory.json").string();
  REQUIRE(cli("run " + sc + " --out " + (dir / "a").string(), dir / "a.log") == 0);
  REQUIRE(cli("run " + sc + " --out " + (dir / "b").string(), dir / "b.log") == 0);
  for (const char* f : {"trajectory_v.csv", "trajectory_w.csv", "trajectory_f.csv", "report.json", "run_record.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  const json report = json::parse(slurp(dir / "a" / "report.json"));
  CHECK(report.contains("certificate"));
  CHECK(report.contains("apriori"));
  CHECK(report.contains("ledger"));
  const json record = json::parse(slurp(dir / "a" / "run_record.json"));
  CHECK(record["scenario_hash"].is_string());
  CHECK(record["seed"] == 1);
}

TEST_CASE("trajectory csv round trip") {
  const fs::path dir = scratch("csv");
  const Scenario sc = scenario("nonfickian-1d.json");
  const RunArtifacts art = run_scenario(sc, dir);
  const CsvSeries s = read_csv(dir / "trajectory_v.csv");
  REQUIRE(s.values.size() == art.trajectory.v.size());
  for (std::size_t n = 0; n < s.values.size(); ++n) {
    CHECK(s.times[n] == sc.problem.mesh.t(n));
    CHECK((s.values[n].array() == art.trajectory.v[n].array()).all());
  }
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("exit");
  const std::string heat = (kScenarios / "heat-memory.json").string();
  std::ofstream(dir / "broken.json") << "{\"name\": \"x\",\n";
  CHECK(cli("run " + (dir / "broken.json").string(), dir / "broken.log") == kExitParse);
  CHECK(slurp(dir / "broken.log").find("line 2, column 1") != std::string::npos);
  CHECK(cli("run " + heat + " --set bogus.key=1", dir / "unknown.log") == kExitParse);
  CHECK(slurp(dir / "unknown.log").find("bogus") != std::string::npos);
  CHECK(cli("run " + (dir / "missing.json").string(), dir / "missing.log") == kExitParse);
  CHECK(cli("frobnicate", dir / "sub.log") == kExitParse);
  CHECK(cli("check " + heat, dir / "check.log") == kExitOk);
  CHECK(cli("check " + heat + " --set operator_A.kind=negated_laplacian", dir / "neg.log") == kExitChecker);
  CHECK(cli("run " + heat + " --set operator_A.kind=exp_entrywise --set solver.max_newton_iter=1 --out " +
                (dir / "exp").string(),
            dir / "exp.log") == kExitSolve);
  CHECK(cli("run " + heat + " --set solver.tol_equation=1e-300 --out " + (dir / "tight").string(), dir / "tight.log") ==
        kExitCertificate);
  CHECK(cli("sweep " + heat + " --param lambda --values 1 --out " + (dir / "sw").string(), dir / "sw.log") ==
        kExitParse);
  CHECK(cli("sweep " + heat + " --param kappa --values 1,2 --out " + (dir / "sw").string(), dir / "sw2.log") ==
        kExitParse);
}

TEST_CASE("checker table reproduces with the same seed") {
  const Scenario sc = scenario("fractional-box-feedback.json");
  std::ostringstream a;
  std::ostringstream b;
  CHECK(check_scenario(sc, a) == kExitOk);
  CHECK(check_scenario(sc, b) == kExitOk);
  CHECK(a.str() == b.str());
  std::ostringstream bad;
  CHECK(check_scenario(scenario("heat-memory.json", {"operator_A.kind=sign_switch"}), bad) == kExitChecker);
  CHECK(bad.str().find("FAIL") != std::string::npos);
}

TEST_CASE("overrides") {
  json doc = json::parse(R"({"a": {"b": 1}})");
  apply_override(doc, "a.b=2.5");
  apply_override(doc, "a.c=hello");
  apply_override(doc, "d=[1,2]");
  CHECK(doc["a"]["b"] == 2.5);
  CHECK(doc["a"]["c"] == "hello");
  CHECK(doc["d"].size() == 2);
  CHECK_THROWS_AS(apply_override(doc, "novalue"), ScenarioError);
  CHECK(scenario_hash(doc) == scenario_hash(json::parse(doc.dump())));
  json other = doc;
  other["a"]["b"] = 3;
  CHECK(scenario_hash(doc) != scenario_hash(other));
}

TEST_CASE("lambda sweep moves towards the memoryless limit") {
  const fs::path dir = scratch("lambda");
  const json doc = load_document((kScenarios / "heat-memory.json").string());
  const auto rows = sweep(doc, "lambda", {0.1, 1.0, 10.0, 100.0}, dir, 4);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(*rows[i].summary.decoupling_metric > *rows[i - 1].summary.decoupling_metric);
    CHECK(*rows[i].summary.no_memory_deviation < *rows[i - 1].summary.no_memory_deviation);
  }
  CHECK(fs::exists(dir / "sweep_summary.csv"));
  CHECK(fs::exists(dir / "lambda_3" / "report.json"));

  // A sweep point reproduces the standalone run of the same scenario.
  const RunArtifacts alone = run_scenario(scenario("heat-memory.json"), dir / "alone", true);
  CHECK(alone.summary.final_h_norm == rows[1].summary.final_h_norm);
  CHECK(slurp(dir / "alone" / "trajectory_v.csv") == slurp(dir / "lambda_1" / "trajectory_v.csv"));
}

TEST_CASE("tau sweep halves the reference error") {
  const fs::path dir = scratch("tau");
  const json doc = load_document((kScenarios / "scalar-analytic.json").string());
  const auto rows = sweep(doc, "tau", {0.02, 0.01, 0.005}, dir, 2);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double ratio = *rows[i - 1].summary.reference_error / *rows[i].summary.reference_error;
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.1));
  }
}
