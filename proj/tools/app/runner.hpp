#pragma once

// Orchestration behind the run, check and sweep subcommands.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scenario.hpp"

namespace memincl::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitParse = 2,
  kExitSolve = 3,
  kExitCertificate = 4,
  kExitChecker = 5,
};

struct RunSummary {
  int exit_code = kExitOk;
  std::string message;
  bool certified = false;
  double final_h_norm = 0.0;
  std::optional<double> min_apriori_margin;
  std::optional<double> decoupling_metric;     // max_n ||w_n||_B
  std::optional<double> no_memory_deviation;   // max_n ||v_n - v_n(no memory)||_H
  std::optional<double> reference_error;
};

struct RunArtifacts {
  RunSummary summary;
  Trajectory trajectory;
  nlohmann::json report;
  nlohmann::json record;
};

/// Solves, certifies and (when out_dir is set) writes trajectory_{v,w,f}.csv,
/// report.json and run_record.json. Never throws for solver failures; those
/// land in summary.exit_code.
[[nodiscard]] RunArtifacts run_scenario(const Scenario& scenario, const std::optional<std::filesystem::path>& out_dir,
                                        bool limit_metrics = false);

/// Runs every checker, prints the table to `out`, returns kExitOk or kExitChecker.
[[nodiscard]] int check_scenario(const Scenario& scenario, std::ostream& out);

struct SweepRow {
  double value = 0.0;
  RunSummary summary;
};

/// `parameter` is one of lambda, tau, p, s. Runs are independent and use up
/// to `jobs` threads; each writes into out_dir/<parameter>_<index>.
/// Writes out_dir/sweep_summary.csv.
[[nodiscard]] std::vector<SweepRow> sweep(const nlohmann::json& document, const std::string& parameter,
                                          const std::vector<double>& values, const std::filesystem::path& out_dir,
                                          std::size_t jobs);

[[nodiscard]] std::string summary_line(const RunSummary& s);

}  // namespace memincl::app
