#include "runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "io.hpp"

namespace memincl::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json constants_json(const OperatorConstants& c) {
  return {{"mu_A", c.mu_A}, {"c_A", c.c_A}, {"beta_A", c.beta_A},
          {"mu_B", c.mu_B}, {"beta_B", c.beta_B}, {"C_e", c.C_e}};
}

json report_json(const AssumptionReport& r) {
  json j{{"property", r.property}, {"pass", r.pass}, {"detail", r.detail}};
  json consts = json::object();
  for (const auto& [k, v] : r.constants) {
    consts[k] = v;
  }
  j["constants"] = consts;
  if (r.witness) {
    j["witness"] = {{"seed", r.witness->seed},
                    {"sample", r.witness->sample},
                    {"description", r.witness->description},
                    {"values", r.witness->values}};
  }
  return j;
}

std::string hex64(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<double> node_times(const TimeMesh& mesh, std::size_t count) {
  std::vector<double> t(count);
  for (std::size_t n = 0; n < count; ++n) {
    t[n] = mesh.t(n);
  }
  return t;
}

double memory_b_norm(const State& w, const OperatorB& b, const Grid& grid) {
  return std::sqrt(std::max(0.0, pairing(b.apply(w), w, grid)));
}

}  // namespace

RunArtifacts run_scenario(const Scenario& sc, const std::optional<fs::path>& out_dir, bool limit_metrics) {
  const ProblemData& data = sc.problem;
  const SolverSettings& s = sc.solver;
  RunArtifacts art;
  RunSummary& summary = art.summary;
  json& report = art.report;

  report["scenario"] = sc.name;
  report["method"] = s.method == Method::Marching ? "marching" : "fixed_point";
  report["rule"] = rule_name(s.rule);

  const OperatorChecks checks = fit_operator_constants(data, CheckOptions{16, sc.seed});
  report["operator_constants"] = constants_json(checks.constants);
  report["operator_checks_pass"] = checks.pass();
  report["operator_checks"] = json::array({report_json(checks.monotone), report_json(checks.growth),
                                           report_json(checks.coercive), report_json(checks.hemicontinuity),
                                           report_json(checks.b)});

  std::optional<AprioriConstants> k;
  try {
    k = gronwall_constants(data, sc.envelope, checks.constants);
  } catch (const InvalidConstantsError& e) {
    report["apriori_unavailable"] = e.what();
  }

  SolverOptions sopts{s.tol_newton, s.max_newton_iter, 0.0};
  try {
    if (s.method == Method::Marching) {
      art.trajectory = marching_solve(data, s.rule, sopts);
    } else {
      if (!k) {
        throw std::runtime_error("fixed_point needs the a priori radius, which is unavailable");
      }
      const std::vector<State> f0(data.mesh.steps, State::Zero(static_cast<Eigen::Index>(data.grid.n)));
      FixedPointResult fp =
          fixed_point_iterate(f0, data, std::sqrt(k->M1), s.rule, FixedPointOptions{s.k_max, s.tol_fp, sopts});
      report["fixed_point"] = {{"iterations", fp.iterations},
                               {"converged", fp.converged},
                               {"truncation_radius", std::sqrt(k->M1)},
                               {"residual_history", fp.residual_history}};
      art.trajectory = std::move(fp.v_star);
    }
  } catch (const std::exception& e) {
    summary.exit_code = kExitSolve;
    summary.message = std::string("solve failed: ") + e.what();
    report["error"] = summary.message;
    art.record = {{"scenario_hash", hex64(scenario_hash(sc.document))}, {"seed", sc.seed}, {"error", summary.message}};
    if (out_dir) {
      fs::create_directories(*out_dir);
      write_json(*out_dir / "report.json", report);
      write_json(*out_dir / "run_record.json", art.record);
    }
    return art;
  }
  const Trajectory& traj = art.trajectory;

  const Certificate cert = residual_certificate(traj, data, CertificateTolerances{s.tol_set, s.tol_equation});
  summary.certified = cert.pass();
  report["certificate"] = {{"max_set_distance", cert.max_set_distance},
                           {"max_equation_residual", cert.max_equation_residual},
                           {"worst_set_node", cert.worst_set_node},
                           {"worst_equation_step", cert.worst_equation_step},
                           {"inclusion_ok", cert.inclusion_ok},
                           {"equation_ok", cert.equation_ok},
                           {"initial_ok", cert.initial_ok},
                           {"tol_set", s.tol_set},
                           {"tol_equation", s.tol_equation},
                           {"pass", cert.pass()}};

  std::size_t newton_max = 0;
  double newton_res = 0.0;
  for (const auto& ns : traj.newton) {
    newton_max = std::max(newton_max, ns.iterations);
    newton_res = std::max(newton_res, ns.residual);
  }
  report["newton"] = {{"max_iterations", newton_max}, {"max_residual", newton_res}};

  const EnergyLedger ledger = energy_ledger(traj, data, checks.constants);
  const std::size_t last = traj.v.size() - 1;
  report["ledger"] = {{"final_identity_slack", ledger.final_identity_slack()},
                      {"max_abs_identity_slack", ledger.max_abs_identity_slack()},
                      {"min_inequality_slack", ledger.min_inequality_slack()},
                      {"final",
                       {{"kinetic", ledger.kinetic[last]},
                        {"memory", ledger.memory[last]},
                        {"coercivity", ledger.coercivity[last]},
                        {"memory_dissipation", ledger.memory_dissipation[last]},
                        {"forcing", ledger.forcing[last]},
                        {"coupling", ledger.coupling[last]}}}};

  if (k) {
    const AprioriReport ap = verify_apriori(traj, *k, data);
    json bounds = json::array();
    for (const auto& b : ap.all()) {
      bounds.push_back(
          {{"name", b.name}, {"value", b.value}, {"bound", b.bound}, {"margin", b.margin()}, {"holds", b.holds()}});
    }
    report["apriori"] = {{"C_Y", k->C_Y}, {"R0", k->R0},     {"C1", k->C1},   {"M1", k->M1},
                         {"M2", k->M2},   {"M2_sq", k->M2_sq}, {"M2_B", k->M2_B}, {"M3", k->M3},
                         {"bounds", bounds}, {"pass", ap.pass()}, {"min_margin", ap.min_margin()}};
    if (ap.first_violation) {
      report["apriori"]["first_violation"] = *ap.first_violation;
    }
    summary.min_apriori_margin = ap.min_margin();
  }

  summary.final_h_norm = h_norm(traj.v.back(), data.grid);
  report["final_h_norm"] = summary.final_h_norm;

  if (sc.reference) {
    double err = 0.0;
    for (std::size_t n = 0; n < traj.v.size(); ++n) {
      err = std::max(err, h_norm(traj.v[n] - scalar_damped_cosine(data.mesh.t(n)), data.grid));
    }
    summary.reference_error = err;
    report["reference"] = {{"name", *sc.reference},
                           {"max_error", err},
                           {"bound_2tau", 2.0 * data.mesh.tau},
                           {"ok", err <= 2.0 * data.mesh.tau}};
  }

  if (limit_metrics) {
    double decoupling = 0.0;
    for (const auto& w : traj.w) {
      decoupling = std::max(decoupling, memory_b_norm(w, data.b, data.grid));
    }
    summary.decoupling_metric = decoupling;
    try {
      const Trajectory plain = solve_without_memory(traj.f, data, sopts);
      summary.no_memory_deviation = max_node_distance(traj.v, plain.v, data.grid);
    } catch (const std::exception&) {
      summary.no_memory_deviation = std::numeric_limits<double>::infinity();
    }
    report["limits"] = {{"decoupling_metric", decoupling}, {"no_memory_deviation", *summary.no_memory_deviation}};
  }

  summary.exit_code = cert.pass() ? kExitOk : kExitCertificate;
  if (!cert.pass()) {
    std::ostringstream os;
    os << "certificate failed: set distance " << cert.max_set_distance << ", equation residual "
       << cert.max_equation_residual << (cert.initial_ok ? "" : ", initial data mismatch");
    summary.message = os.str();
  }

  json files = json::array();
  if (out_dir) {
    fs::create_directories(*out_dir);
    const auto& outputs = sc.document["outputs"];
    if (outputs.value("trajectory", true)) {
      write_csv(*out_dir / "trajectory_v.csv", node_times(data.mesh, traj.v.size()), traj.v);
      write_csv(*out_dir / "trajectory_w.csv", node_times(data.mesh, traj.w.size()), traj.w);
      write_csv(*out_dir / "trajectory_f.csv", node_times(data.mesh, traj.f.size()), traj.f);
      files.insert(files.end(), {"trajectory_v.csv", "trajectory_w.csv", "trajectory_f.csv"});
    }
    if (outputs.value("report", true)) {
      files.push_back("report.json");
    }
    files.push_back("run_record.json");
  }
  art.record = {{"scenario_hash", hex64(scenario_hash(sc.document))},
                {"seed", sc.seed},
                {"constants", constants_json(checks.constants)},
                {"certificate", report["certificate"]},
                {"files", files},
                {"scenario", sc.document}};
  if (k) {
    art.record["apriori_constants"] = {{"M1", k->M1}, {"M2", k->M2}, {"M2_B", k->M2_B}, {"M3", k->M3}};
  }
  if (out_dir) {
    if (sc.document["outputs"].value("report", true)) {
      write_json(*out_dir / "report.json", report);
    }
    write_json(*out_dir / "run_record.json", art.record);
  }
  return art;
}

int check_scenario(const Scenario& sc, std::ostream& out) {
  const ProblemData& data = sc.problem;
  const OperatorChecks checks = fit_operator_constants(data, CheckOptions{16, sc.seed});
  const AssumptionReport growth_f =
      check_growth_F(data.field, sc.envelope, data.mesh, GrowthCheckOptions{8, sc.seed, 64});

  const OperatorConstants& c = checks.constants;
  out << std::setprecision(6);
  out << "scenario: " << sc.name << "\n";
  out << "constants: mu_A=" << c.mu_A << " c_A=" << c.c_A << " beta_A=" << c.beta_A << " beta_B=" << c.beta_B
      << " mu_B=" << c.mu_B << " C_e=" << c.C_e << "\n";
  out << "envelope: a=" << (sc.envelope.a.empty() ? 0.0 : sc.envelope.a.front()) << " b=" << sc.envelope.b
      << " q=" << sc.envelope.q << " valid=" << (growth_f.pass ? "yes" : "no") << "\n";

  bool all = true;
  for (const AssumptionReport* r :
       {&checks.monotone, &checks.growth, &checks.coercive, &checks.hemicontinuity, &checks.b, &growth_f}) {
    all = all && r->pass;
    out << std::left << std::setw(34) << r->property << (r->pass ? "PASS" : "FAIL");
    if (!r->detail.empty()) {
      out << "  " << r->detail;
    }
    out << "\n";
    if (!r->pass && r->witness) {
      out << "    witness: seed=" << r->witness->seed << " sample=" << r->witness->sample << " "
          << r->witness->description;
      if (!r->witness->values.empty()) {
        out << " values=[";
        for (std::size_t i = 0; i < r->witness->values.size(); ++i) {
          out << (i ? ", " : "") << r->witness->values[i];
        }
        out << "]";
      }
      out << "\n";
    }
  }
  out << (all ? "all checks passed" : "checks failed") << "\n";
  return all ? kExitOk : kExitChecker;
}

std::string summary_line(const RunSummary& s) {
  std::ostringstream os;
  os << std::setprecision(10) << "final_h_norm=" << s.final_h_norm;
  if (s.min_apriori_margin) os << " min_apriori_margin=" << *s.min_apriori_margin;
  os << " certified=" << (s.certified ? "yes" : "no");
  if (s.reference_error) os << " reference_error=" << *s.reference_error;
  if (s.decoupling_metric) os << " decoupling_metric=" << *s.decoupling_metric;
  if (s.no_memory_deviation) os << " no_memory_deviation=" << *s.no_memory_deviation;
  os << " exit=" << s.exit_code;
  return os.str();
}

namespace {

void apply_parameter(json& doc, const std::string& parameter, double value) {
  if (parameter == "lambda") {
    doc["memory"]["lambda_per_time"] = value;
  } else if (parameter == "p") {
    doc["exponent_p"] = value;
  } else if (parameter == "s") {
    doc["operator_B"]["s"] = value;
  } else if (parameter == "tau") {
    const double T = doc.contains("time") && doc["time"].contains("final_time")
                         ? doc["time"]["final_time"].get<double>()
                         : 1.0;
    const double steps = std::round(T / value);
    if (!(value > 0.0) || steps < 1.0 || std::abs(steps * value - T) > 1e-9 * T) {
      throw ScenarioError("sweep: tau = " + format_double(value) + " does not divide the final time");
    }
    doc["time"]["steps"] = static_cast<std::size_t>(steps);
  } else {
    throw ScenarioError("sweep: unknown parameter '" + parameter + "' (expected lambda, tau, p or s)");
  }
}

std::string optional_cell(const std::optional<double>& x) { return x ? format_double(*x) : ""; }

}  // namespace

std::vector<SweepRow> sweep(const json& document, const std::string& parameter, const std::vector<double>& values,
                            const fs::path& out_dir, std::size_t jobs) {
  if (values.size() < 2) {
    throw ScenarioError("sweep: need at least two values");
  }
  {
    json probe = document;
    apply_parameter(probe, parameter, values.front());
  }
  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      rows[i].value = values[i];
      try {
        json doc = document;
        apply_parameter(doc, parameter, values[i]);
        const Scenario sc = build_scenario(doc);
        rows[i].summary =
            run_scenario(sc, out_dir / (parameter + "_" + std::to_string(i)), parameter == "lambda").summary;
      } catch (const ScenarioError& e) {
        rows[i].summary.exit_code = kExitParse;
        rows[i].summary.message = e.what();
      } catch (const std::exception& e) {
        rows[i].summary.exit_code = kExitSolve;
        rows[i].summary.message = e.what();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, values.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& th : pool) {
    th.join();
  }

  fs::create_directories(out_dir);
  std::ofstream csv(out_dir / "sweep_summary.csv", std::ios::binary);
  csv << "value,final_h_norm,min_apriori_margin,certified,exit_code,decoupling_metric,no_memory_deviation,"
         "reference_error\n";
  for (const auto& r : rows) {
    csv << format_double(r.value) << ',' << format_double(r.summary.final_h_norm) << ','
        << optional_cell(r.summary.min_apriori_margin) << ',' << (r.summary.certified ? 1 : 0) << ','
        << r.summary.exit_code << ',' << optional_cell(r.summary.decoupling_metric) << ','
        << optional_cell(r.summary.no_memory_deviation) << ',' << optional_cell(r.summary.reference_error) << '\n';
  }
  return rows;
}

}  // namespace memincl::app
