// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "app/runner.hpp"
#include "app/scenario.hpp"
#include "memincl/diagnostics.hpp"

namespace fs = std::filesystem;
using namespace memincl;
using namespace memincl::app;

namespace {

const fs::path kScenarios{MEMINCL_SCENARIO_DIR};

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;
  std::function<Outcome()> body;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

State random_state(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  State v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  return v;
}

Scenario load_scenario(const std::string& file) { return build_scenario(load_document((kScenarios / file).string())); }

std::vector<fs::path> bundled_scenarios() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(kScenarios)) {
    if (e.path().extension() == ".json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("memincl_acceptance_" + name);
  fs::remove_all(dir);
  return dir;
}

std::vector<State> zeros(const ProblemData& d) {
  return std::vector<State>(d.mesh.steps, State::Zero(static_cast<Eigen::Index>(d.grid.n)));
}

bool same_witness(const AssumptionReport& a, const AssumptionReport& b) {
  if (!a.witness || !b.witness) return false;
  return a.witness->seed == b.witness->seed && a.witness->sample == b.witness->sample &&
         a.witness->values == b.witness->values && a.witness->description == b.witness->description;
}

// 1 ---------------------------------------------------------------------------
Outcome kernel_equivalence() {
  std::mt19937_64 rng(20240101);
  std::uniform_int_distribution<std::size_t> nodes(1, 64);
  std::uniform_int_distribution<std::size_t> steps(8, 512);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = nodes(rng);
    const std::size_t N = steps(rng);
    const double lambda = std::pow(10.0, -3.0 + 6.0 * unit(rng));
    const double tau = std::pow(10.0, -4.0 + 3.0 * unit(rng));
    const double T = tau * static_cast<double>(N);
    const TimeMesh mesh = TimeMesh::make(T, N);
    const MemoryParams mp{lambda, State::Zero(static_cast<Eigen::Index>(n)), T};
    std::vector<State> v;
    for (std::size_t j = 0; j < mesh.nodes(); ++j) v.push_back(random_state(n, rng));
    const auto direct = apply_k_direct(v, mp, mesh);
    const auto rec = apply_k_recurrence(v, mp, mesh);
    for (std::size_t j = 0; j < direct.size(); ++j) {
      const double scale = std::max(1.0, direct[j].cwiseAbs().maxCoeff());
      worst = std::max(worst, (direct[j] - rec[j]).cwiseAbs().maxCoeff() / scale);
    }
  }
  return {worst <= 1e-12, "100 cases, worst relative difference " + fmt(worst) + " (tol 1e-12)"};
}

// 2 ---------------------------------------------------------------------------
double simpson_kernel(double lambda, double T, std::size_t m) {
  const double h = T / static_cast<double>(m);
  double s = kernel_eval(0.0, lambda) + kernel_eval(T, lambda);
  for (std::size_t i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * kernel_eval(static_cast<double>(i) * h, lambda);
  return s * h / 3.0;
}

Outcome convolution_bounds() {
  double quad_err = 0.0;
  for (double lambda : {0.01, 0.5, 1.0, 3.0, 10.0}) {
    for (double T : {0.1, 1.0, 2.0}) {
      quad_err = std::max(quad_err, std::abs(simpson_kernel(lambda, T, 200000) - l1_kernel_norm(lambda, T)));
    }
  }
  std::size_t checked = 0;
  std::size_t failed = 0;
  double min_slack = 1e300;
  auto check = [&](const std::vector<State>& v, const MemoryParams& mp, const TimeMesh& mesh, const Grid& g) {
    const KernelBoundReport r = verify_lemma_bounds(v, apply_k_direct(v, mp, mesh), mp, mesh, g);
    ++checked;
    if (!(r.l2_ok && r.c_ok)) ++failed;
    min_slack = std::min(min_slack, r.slack());
  };
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < 100; ++s) {
    const Grid g = Grid::make(1 + static_cast<std::size_t>(16 * unit(rng)), 1.0);
    const TimeMesh mesh = TimeMesh::make(0.5 + 2.0 * unit(rng), 16 + static_cast<std::size_t>(200 * unit(rng)));
    const MemoryParams mp{std::pow(10.0, -2.0 + 3.0 * unit(rng)), State::Zero(static_cast<Eigen::Index>(g.n)),
                          mesh.final_time};
    std::vector<State> v;
    for (std::size_t n = 0; n < mesh.nodes(); ++n) v.push_back(random_state(g.n, rng));
    check(v, mp, mesh, g);
  }
  for (const auto& path : bundled_scenarios()) {
    const Scenario sc = build_scenario(load_document(path.string()));
    const RunArtifacts art = run_scenario(sc, std::nullopt);
    if (art.trajectory.v.size() == sc.problem.mesh.nodes()) {
      check(art.trajectory.v, sc.problem.memory(), sc.problem.mesh, sc.problem.grid);
    }
  }
  const bool pass = quad_err <= 1e-10 && failed == 0;
  return {pass, "L1 norm vs Simpson " + fmt(quad_err) + " (tol 1e-10); " + std::to_string(checked) +
                    " trajectories, " + std::to_string(failed) + " violations, min slack " + fmt(min_slack)};
}

// 3 ---------------------------------------------------------------------------
Outcome relation_order() {
  const Grid g = Grid::make(4, 1.0);
  const double lambda = 2.0;
  std::mt19937_64 rng(3);
  const State c = random_state(4, rng);
  std::vector<double> taus;
  std::vector<double> res;
  for (double tau : {1e-2, 5e-3, 2.5e-3}) {
    const auto steps = static_cast<std::size_t>(std::lround(1.0 / tau));
    const TimeMesh mesh = TimeMesh::make(1.0, steps);
    const MemoryParams mp{lambda, State::Zero(4), 1.0};
    const std::vector<State> v(mesh.nodes(), c);
    const auto w = apply_k_recurrence(v, mp, mesh);
    taus.push_back(tau);
    res.push_back(check_relation5(v, w, mp, mesh, g));
  }
  const double order = fitted_log_slope(taus, res);
  return {order >= 1.9, "fitted order " + fmt(order) + " (need >= 1.9), residuals " + fmt(res[0]) + ", " +
                            fmt(res[1]) + ", " + fmt(res[2])};
}

// 4 ---------------------------------------------------------------------------
Outcome scalar_reproduction() {
  const Scenario sc = load_scenario("scalar-analytic.json");
  const RunArtifacts art = run_scenario(sc, std::nullopt);
  const double tau = sc.problem.mesh.tau;
  const double err = art.summary.reference_error.value_or(1e300);
  const ConvergenceRunner runner = [](const ProblemData& d) { return solve_single_valued(zeros(d), d); };
  const ConvergenceResult r =
      convergence_study(sc.problem, {50, 100, 200}, runner, AnalyticReference{scalar_damped_cosine});
  const double order = r.fitted_order();
  const bool pass = err <= 2.0 * tau && std::abs(order - 1.0) <= 0.1;
  return {pass, "max error " + fmt(err) + " <= 2 tau = " + fmt(2.0 * tau) + "; order " + fmt(order) +
                    " over tau = 0.02, 0.01, 0.005 (need 1 +- 0.1)"};
}

// 5 ---------------------------------------------------------------------------
Outcome manufactured_convergence() {
  const Grid g = Grid::make(64, 1.0);
  ProblemData d{g,
                TimeMesh::make(1.0, 64),
                1.0,
                State::Zero(64),
                manufactured_solution(g, 0.0),
                OperatorA::p_laplacian(g, 3.0),
                OperatorB::fractional_laplacian(g, 0.75),
                SetField::singleton(g, [](double, const State& v) -> State { return State::Zero(v.size()); }),
                Exponents::from_p(3.0)};
  const ConvergenceRunner runner = [](const ProblemData& pd) {
    return solve_single_valued(manufactured_forcing(pd), pd);
  };
  const ConvergenceResult r = convergence_study(d, {128, 256, 512, 1024}, runner,
                                                AnalyticReference{[g](double t) { return manufactured_solution(g, t); }});
  const double order = r.fitted_order();
  std::string errs;
  for (double e : r.errors) errs += " " + fmt(e);
  return {order >= 0.8, "p = 3, s = 0.75, n = 64, N = 128..1024: order " + fmt(order) + " (need >= 0.8), errors" + errs};
}

// 6 ---------------------------------------------------------------------------
Outcome apriori_bounds() {
  std::size_t certified = 0;
  std::size_t total = 0;
  double min_margin = 1e300;
  std::string failures;
  for (const auto& path : bundled_scenarios()) {
    ++total;
    const Scenario sc = build_scenario(load_document(path.string()));
    const RunArtifacts art = run_scenario(sc, std::nullopt);
    if (!art.summary.certified) continue;
    ++certified;
    const auto& m = art.summary.min_apriori_margin;
    if (!m || *m <= 0.0) {
      failures += " " + sc.name;
      continue;
    }
    min_margin = std::min(min_margin, *m);
  }
  const bool pass = certified >= 10 && failures.empty();
  return {pass, std::to_string(certified) + "/" + std::to_string(total) + " scenarios certified, min margin " +
                    fmt(min_margin) + (failures.empty() ? "" : ", non-positive margin:" + failures)};
}

// 7 ---------------------------------------------------------------------------
Outcome energy_identity() {
  std::vector<double> taus;
  std::vector<double> slack;
  for (std::size_t steps : {50, 100, 200, 400, 800}) {
    const Grid g = Grid::make(16, 1.0);
    State v0(16);
    for (std::size_t i = 0; i < 16; ++i) v0[static_cast<Eigen::Index>(i)] = std::sin(M_PI * g.x(i));
    ProblemData d{g,
                  TimeMesh::make(1.0, steps),
                  2.0,
                  0.3 * laplacian_eigenvector(g, 1),
                  v0,
                  OperatorA::laplacian(g),
                  OperatorB::laplacian(g),
                  SetField::singleton(g, [](double, const State& v) -> State { return State::Zero(v.size()); }),
                  Exponents::from_p(2.0)};
    std::vector<State> f(steps);
    for (std::size_t n = 0; n < steps; ++n) f[n] = std::cos(3.0 * d.mesh.t(n)) * laplacian_eigenvector(g, 2);
    const Trajectory t = solve_single_valued(f, d);
    const OperatorChecks checks = fit_operator_constants(d);
    slack.push_back(energy_ledger(t, d, checks.constants).max_abs_identity_slack());
    taus.push_back(d.mesh.tau);
  }
  const double order = fitted_log_slope(taus, slack);
  return {order >= 0.9, "max per-node slack " + fmt(slack.front()) + " -> " + fmt(slack.back()) + ", order " +
                            fmt(order) + " (need >= 0.9)"};
}

// 8 ---------------------------------------------------------------------------
Outcome truncation_semantics() {
  const Scenario sc = load_scenario("fixed-point-ball.json");
  const ProblemData& d = sc.problem;
  const OperatorChecks checks = fit_operator_constants(d);
  const AprioriConstants k = gronwall_constants(d, sc.envelope, checks.constants);
  const double radius = std::sqrt(k.M1);
  const SetField tr = truncate(d.field, radius);
  std::mt19937_64 rng(808);
  std::uniform_int_distribution<std::size_t> node(0, d.mesh.steps);
  std::uniform_real_distribution<double> logmag(-3.0, 6.0);
  std::size_t inside = 0;
  std::size_t outside = 0;
  std::size_t bad = 0;
  double worst_ratio = 0.0;
  double worst_literal = 0.0;
  double max_norm = 0.0;
  for (int probe = 0; probe < 200; ++probe) {
    const std::size_t n = node(rng);
    const double t = d.mesh.t(n);
    State v = random_state(d.grid.n, rng);
    const double target = probe == 0 ? 1e6 : std::pow(10.0, logmag(rng));
    v *= target / h_norm(v, d.grid);
    max_norm = std::max(max_norm, h_norm(v, d.grid));
    const SetValue got = evaluate(tr, t, v);
    if (h_norm(v, d.grid) <= radius) {
      ++inside;
      if (!(got == evaluate(d.field, t, v))) ++bad;
    } else {
      ++outside;
      if (!(got == evaluate(d.field, t, radial_retraction(v, radius, d.grid)))) ++bad;
    }
    const double a_hat = sc.envelope.a[n] + sc.envelope.b * std::pow(radius, 2.0 / sc.envelope.q);
    // Same envelope with M1 itself in place of the radius.
    const double a_lit = sc.envelope.a[n] + sc.envelope.b * std::pow(k.M1, 2.0 / sc.envelope.q);
    worst_ratio = std::max(worst_ratio, magnitude(got) / a_hat);
    worst_literal = std::max(worst_literal, magnitude(got) / a_lit);
  }
  const bool pass = bad == 0 && worst_ratio <= 1.0 && worst_literal <= 1.0 && inside > 0 && outside > 0;
  return {pass, std::to_string(inside) + " inside / " + std::to_string(outside) + " outside the ball of radius sqrt(M1) = " +
                    fmt(radius) + ", max ||v|| " + fmt(max_norm) + ", " + std::to_string(bad) +
                    " mismatches, max |F^| / a^ = " + fmt(worst_ratio) +
                    " (with M1 as radius: " + fmt(worst_literal) + ")"};
}

// 9 ---------------------------------------------------------------------------
Outcome fixed_point_certification() {
  const RunArtifacts single = run_scenario(load_scenario("fixed-point-singleton.json"), std::nullopt);
  const auto& fs1 = single.report["fixed_point"];
  const bool single_ok = single.summary.exit_code == kExitOk && fs1["converged"] == true && fs1["iterations"] == 1 &&
                         fs1["residual_history"].size() == 2 && fs1["residual_history"][1] == 0.0;

  const RunArtifacts ball = run_scenario(load_scenario("fixed-point-ball.json"), std::nullopt);
  const auto& hist = ball.report["fixed_point"]["residual_history"];
  bool monotone = hist.size() >= 2;
  for (std::size_t k = 1; k < hist.size(); ++k) monotone = monotone && hist[k].get<double>() < hist[k - 1].get<double>();
  const auto& cert = ball.report["certificate"];
  const double dist = cert["max_set_distance"].get<double>();
  const double eq = cert["max_equation_residual"].get<double>();
  const bool ball_ok = ball.report["fixed_point"]["converged"] == true && monotone && cert["pass"] == true &&
                       dist <= 1e-9 && eq <= 1e-8;
  return {single_ok && ball_ok, "singleton: " + fs1["iterations"].dump() + " iteration, history " +
                                    fs1["residual_history"].dump() + "; ball: " + std::to_string(hist.size()) +
                                    " residuals, monotone " + (monotone ? "yes" : "no") + ", dist " + fmt(dist) +
                                    ", equation residual " + fmt(eq)};
}

// 10 --------------------------------------------------------------------------
Outcome limit_regimes() {
  const json doc = load_document((kScenarios / "heat-memory.json").string());
  const double tau = doc["time"]["final_time"].get<double>() / doc["time"]["steps"].get<double>();
  const auto rows = sweep(doc, "lambda", {1e-8, 1e2, 1e3}, scratch("limits"), 3);
  const double decoupling = rows[0].summary.decoupling_metric.value_or(1e300);
  bool pass = rows[0].summary.exit_code == kExitOk && decoupling <= 1e-6;
  std::ostringstream detail;
  detail << "decoupling at lambda = 1e-8: " << fmt(decoupling) << " (tol 1e-6)";
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double dev = rows[i].summary.no_memory_deviation.value_or(1e300);
    const double bound = 10.0 / rows[i].value + 10.0 * tau;
    pass = pass && rows[i].summary.exit_code == kExitOk && dev <= bound;
    detail << "; no-memory deviation at lambda = " << fmt(rows[i].value) << ": " << fmt(dev) << " <= " << fmt(bound);
  }
  return {pass, detail.str()};
}

// 11 --------------------------------------------------------------------------
Outcome checker_falsification() {
  const Grid g = Grid::make(12, 1.0);
  const TimeMesh mesh = TimeMesh::make(1.0, 20);
  const SetField unit_ball =
      SetField::ball(g, [](double, const State& v) -> State { return -v; }, [](double, const State&) { return 1.0; });
  const GrowthEnvelope undersized = GrowthEnvelope::constant(mesh, 1.0, 0.5, 2.0);
  const GrowthEnvelope adequate = GrowthEnvelope::constant(mesh, 1.0, 1.0, 2.0);

  struct Broken {
    std::string name;
    std::function<AssumptionReport()> run;
  };
  const std::vector<Broken> broken{
      {"non-monotone A", [&] { return check_monotone(OperatorA::negated_laplacian(g)); }},
      {"asymmetric B", [&] { return check_B(OperatorB::laplacian(g).with_asymmetry(1e-3)); }},
      {"undersized envelope", [&] { return check_growth_F(unit_ball, undersized, mesh); }},
      {"discontinuous A", [&] { return check_hemicontinuity(OperatorA::sign_switch(g)); }},
  };
  const std::vector<std::pair<std::string, std::function<AssumptionReport()>>> healthy{
      {"monotone A", [&] { return check_monotone(OperatorA::p_laplacian(g, 3.0)); }},
      {"symmetric B", [&] { return check_B(OperatorB::fractional_laplacian(g, 0.75)); }},
      {"adequate envelope", [&] { return check_growth_F(unit_ball, adequate, mesh); }},
      {"continuous A", [&] { return check_hemicontinuity(OperatorA::p_laplacian(g, 3.0)); }},
  };
  bool pass = true;
  std::string detail;
  for (const auto& b : broken) {
    const AssumptionReport first = b.run();
    const AssumptionReport second = b.run();
    const bool ok = !first.pass && first.witness.has_value() && same_witness(first, second);
    pass = pass && ok;
    detail += b.name + (ok ? " flagged" : " MISSED") + "; ";
  }
  for (const auto& [name, run] : healthy) {
    const bool ok = run().pass;
    pass = pass && ok;
    detail += name + (ok ? " passes" : " REJECTED") + "; ";
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "kernel oracle equivalence", 10.0, kernel_equivalence},
      {2, "kernel norm and convolution bounds", 5.0, convolution_bounds},
      {3, "memory relation residual order", 2.0, relation_order},
      {4, "analytic scalar reproduction", 5.0, scalar_reproduction},
      {5, "manufactured solution convergence", 60.0, manufactured_convergence},
      {6, "a priori bounds on bundled scenarios", 120.0, apriori_bounds},
      {7, "discrete energy identity", 30.0, energy_identity},
      {8, "truncation semantics", 5.0, truncation_semantics},
      {9, "fixed-point certification", 60.0, fixed_point_certification},
      {10, "limit regimes", 60.0, limit_regimes},
      {11, "checker falsification", 20.0, checker_falsification},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.body();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.time_limit;
    const bool ok = out.pass && in_time;
    if (!ok) ++failed;
    std::printf("[%s] %2d %s: %s (%.2f s, limit %.0f s)\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(),
                out.detail.c_str(), secs, c.time_limit);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
