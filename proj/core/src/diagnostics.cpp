#include "memincl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace memincl {

namespace {

double constant_or(const AssumptionReport& report, const std::string& key, double fallback) {
  const auto it = report.constants.find(key);
  return it == report.constants.end() ? fallback : it->second;
}

}  // namespace

OperatorChecks fit_operator_constants(const ProblemData& data, const CheckOptions& options) {
  const double p = data.exps.p;
  OperatorChecks checks;
  checks.monotone = check_monotone(data.a, options);
  checks.growth = check_growth_A(data.a, p, options);
  checks.coercive = check_coercive_A(data.a, p, options);
  checks.hemicontinuity = check_hemicontinuity(data.a, options);
  checks.b = check_B(data.b);

  OperatorConstants& c = checks.constants;
  c.mu_A = constant_or(checks.coercive, "mu_A", 0.0);
  c.c_A = constant_or(checks.coercive, "c_A", 0.0);
  c.beta_A = constant_or(checks.growth, "beta_A", std::numeric_limits<double>::infinity());
  c.mu_B = constant_or(checks.b, "mu_B", 0.0);
  c.beta_B = constant_or(checks.b, "beta_B", std::numeric_limits<double>::infinity());
  // For p = 2 the sharp constant is 1 / sqrt(lambda_1) in closed form.
  c.C_e = p == 2.0 ? 1.0 / std::sqrt(laplacian_eigenvalue(data.grid, 1)) : embedding_constant(data.grid, p);
  return checks;
}

double EnergyLedger::max_abs_identity_slack() const {
  double worst = 0.0;
  for (double s : identity_slack) {
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

double EnergyLedger::final_identity_slack() const { return identity_slack.empty() ? 0.0 : identity_slack.back(); }

double EnergyLedger::min_inequality_slack() const {
  double worst = std::numeric_limits<double>::infinity();
  for (double s : inequality_slack) {
    worst = std::min(worst, s);
  }
  return inequality_slack.empty() ? 0.0 : worst;
}

EnergyLedger energy_ledger(const Trajectory& traj, const ProblemData& data, const OperatorConstants& constants) {
  const Grid& grid = data.grid;
  const double tau = data.mesh.tau;
  const double lambda = data.lambda;
  const double p = data.exps.p;
  const std::size_t nodes = traj.v.size();
  const double alpha = -std::expm1(-lambda * tau);
  const double discrete_weight = tau / (2.0 * alpha);

  const double u0_b_sq = pairing(data.b.apply(data.u0), data.u0, grid);
  const double u0_b = std::sqrt(std::max(0.0, u0_b_sq));
  const double v0_sq = pairing(traj.v[0], traj.v[0], grid);

  EnergyLedger ledger;
  for (auto* series : {&ledger.kinetic, &ledger.memory, &ledger.coercivity, &ledger.memory_dissipation,
                       &ledger.forcing, &ledger.coupling, &ledger.identity_slack, &ledger.inequality_lhs,
                       &ledger.inequality_rhs, &ledger.inequality_slack}) {
    series->assign(nodes, 0.0);
  }

  double pairing_sum = 0.0;
  double coercivity_sum = 0.0;
  double dissipation_sum = 0.0;
  double forcing_sum = 0.0;
  double forcing_bound_sum = 0.0;
  double coupling_sum = 0.0;
  double coupling_bound_sum = 0.0;
  double defect_sum = 0.0;

  for (std::size_t n = 0; n < nodes; ++n) {
    const State big_w = traj.w[n] + data.u0;
    const State b_big_w = data.b.apply(big_w);
    const double w_b_sq = pairing(b_big_w, big_w, grid);
    const double v_sq = pairing(traj.v[n], traj.v[n], grid);
    const double t = data.mesh.t(n);

    ledger.kinetic[n] = 0.5 * v_sq;
    ledger.memory[n] = w_b_sq / (2.0 * lambda);
    ledger.coercivity[n] = constants.mu_A * coercivity_sum;
    ledger.memory_dissipation[n] = dissipation_sum;
    ledger.forcing[n] = forcing_sum;
    ledger.coupling[n] = coupling_sum;

    const double continuous_rhs = 0.5 * v_sq - 0.5 * v0_sq + (w_b_sq - u0_b_sq) / (2.0 * lambda) +
                                  dissipation_sum - coupling_sum;
    ledger.identity_slack[n] = pairing_sum - continuous_rhs;

    ledger.inequality_lhs[n] =
        0.5 * v_sq + constants.mu_A * coercivity_sum + discrete_weight * w_b_sq + dissipation_sum;
    ledger.inequality_rhs[n] = constants.c_A * t + 0.5 * v0_sq + discrete_weight * u0_b_sq + forcing_bound_sum +
                               coupling_bound_sum + defect_sum;
    ledger.inequality_slack[n] = ledger.inequality_rhs[n] - ledger.inequality_lhs[n];

    if (n + 1 == nodes || n >= traj.f.size()) {
      break;
    }
    const State& v_next = traj.v[n + 1];
    const State next_big_w = traj.w[n + 1] + data.u0;
    const State delta_w = next_big_w - big_w;
    const double w_b = std::sqrt(std::max(0.0, w_b_sq));

    pairing_sum += pairing(v_next - traj.v[n], v_next, grid) + tau * pairing(b_big_w, v_next, grid);
    coercivity_sum += tau * std::pow(va_norm(v_next, grid, p), p);
    dissipation_sum += tau * w_b_sq;
    forcing_sum += tau * pairing(traj.f[n], v_next, grid);
    forcing_bound_sum += tau * constants.C_e * h_norm(traj.f[n], grid) * va_norm(v_next, grid, p);
    coupling_sum += tau * pairing(b_big_w, data.u0, grid);
    coupling_bound_sum += tau * w_b * u0_b;
    defect_sum += discrete_weight * std::max(0.0, pairing(data.b.apply(delta_w), delta_w, grid));
  }
  return ledger;
}

AprioriConstants gronwall_constants(const ProblemData& data, const GrowthEnvelope& env,
                                    const OperatorConstants& ops) {
  if (!(ops.mu_A > 0.0)) {
    throw InvalidConstantsError("gronwall_constants: mu_A must be positive");
  }
  if (!(env.b > 0.0)) {
    throw InvalidConstantsError("gronwall_constants: envelope b must be positive");
  }
  if (!(ops.mu_B > 0.0)) {
    throw InvalidConstantsError("gronwall_constants: mu_B must be positive");
  }
  const TimeMesh& mesh = data.mesh;
  if (env.a.size() < mesh.nodes()) {
    throw InvalidConstantsError("gronwall_constants: envelope not sampled on the mesh");
  }
  const double p = data.exps.p;
  const double q = data.exps.q;
  const double T = mesh.final_time;
  const double tau = mesh.tau;

  AprioriConstants k;
  k.ops = ops;
  k.p = p;
  k.q = q;
  k.C_Y = std::pow(p * ops.mu_A / 2.0, -q / p) / q;

  double a_q_sum = 0.0;
  for (std::size_t n = 0; n < mesh.steps; ++n) {
    a_q_sum += tau * std::pow(env.a[n], q);
  }
  k.a_lq = std::pow(a_q_sum, 1.0 / q);

  const double v0_sq = pairing(data.v0, data.v0, data.grid);
  const double u0_b_sq = std::max(0.0, pairing(data.b.apply(data.u0), data.u0, data.grid));
  const double young = k.C_Y * std::pow(ops.C_e, q) * std::pow(2.0, q - 1.0);

  k.R0 = ops.c_A * T + 0.5 * v0_sq + (1.0 / (2.0 * data.lambda) + T / 2.0) * u0_b_sq + young * a_q_sum;
  k.C1 = young * std::pow(env.b, q);
  k.M1 = 2.0 * k.R0 * std::exp(2.0 * k.C1 * T);
  const double budget = k.R0 + k.C1 * T * k.M1;
  k.M2 = 2.0 / ops.mu_A * budget;
  k.M2_sq = std::pow(k.M2, 2.0 / p) * std::pow(T, 1.0 - 2.0 / p);
  k.M2_B = 2.0 * data.lambda * budget;

  const double principal = ops.beta_A * (std::pow(T, 1.0 / q) + std::pow(k.M2, (p - 1.0) / p));
  const double source = ops.C_e * (k.a_lq + env.b * std::pow(T * k.M1, 1.0 / q));
  const double memory = ops.beta_B * std::sqrt(k.M2_B / ops.mu_B);
  k.M3 = std::max(principal + source, memory);
  return k;
}

double AprioriReport::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : all()) {
    m = std::min(m, b.margin());
  }
  return m;
}

AprioriReport verify_apriori(const Trajectory& traj, const AprioriConstants& k, const ProblemData& data) {
  const Grid& grid = data.grid;
  const double tau = data.mesh.tau;
  const double p = data.exps.p;

  AprioriReport report;
  report.sup_h = {"sup_n ||v_n||_H^2 <= M1", 0.0, k.M1};
  report.va_square = {"sum tau ||v||_VA^2 <= M2 (square form)", 0.0, k.M2_sq};
  report.va_power = {"sum tau ||v||_VA^p <= M2 (p form)", 0.0, k.M2};
  report.memory_b = {"sup_n ||w_n + u0||_B^2 <= M2_B", 0.0, k.M2_B};

  for (std::size_t n = 0; n < traj.v.size(); ++n) {
    report.sup_h.value = std::max(report.sup_h.value, pairing(traj.v[n], traj.v[n], grid));
    const State big_w = traj.w[n] + data.u0;
    report.memory_b.value = std::max(report.memory_b.value, pairing(data.b.apply(big_w), big_w, grid));
    if (n > 0) {
      const double va = va_norm(traj.v[n], grid, p);
      report.va_square.value += tau * va * va;
      report.va_power.value += tau * std::pow(va, p);
    }
  }
  for (const auto& b : report.all()) {
    if (!b.holds()) {
      report.first_violation = b.name;
      break;
    }
  }
  return report;
}

double ConvergenceResult::fitted_order() const { return fitted_log_slope(taus, errors); }

double fitted_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fitted_log_slope: need two or more matching points");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double max_node_distance(const std::vector<State>& a, const std::vector<State>& b, const Grid& grid) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("max_node_distance: trajectories differ in length");
  }
  double worst = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    worst = std::max(worst, h_norm(a[n] - b[n], grid));
  }
  return worst;
}

ConvergenceResult convergence_study(const ProblemData& data, const std::vector<std::size_t>& steps,
                                    const ConvergenceRunner& runner, const ConvergenceReference& reference) {
  if (steps.size() < 3) {
    throw std::invalid_argument("convergence_study: need at least three meshes");
  }
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i] <= steps[i - 1]) {
      throw std::invalid_argument("convergence_study: tau list must be strictly decreasing");
    }
  }
  const double T = data.mesh.final_time;

  std::optional<Trajectory> fine;
  std::size_t fine_steps = 0;
  if (const auto* fg = std::get_if<FineGridReference>(&reference)) {
    fine_steps = fg->refinement * steps.back();
    for (std::size_t s : steps) {
      if (fine_steps % s != 0) {
        throw std::invalid_argument("convergence_study: fine mesh must be a common refinement");
      }
    }
    ProblemData fine_data = data;
    fine_data.mesh = TimeMesh::make(T, fine_steps);
    fine = runner(fine_data);
  }

  ConvergenceResult result;
  for (std::size_t s : steps) {
    ProblemData run_data = data;
    run_data.mesh = TimeMesh::make(T, s);
    const Trajectory traj = runner(run_data);
    double err = 0.0;
    for (std::size_t n = 0; n < traj.v.size(); ++n) {
      State ref;
      if (fine) {
        ref = fine->v[n * (fine_steps / s)];
      } else {
        ref = std::get<AnalyticReference>(reference).solution(run_data.mesh.t(n));
      }
      err = std::max(err, h_norm(traj.v[n] - ref, data.grid));
    }
    result.steps.push_back(s);
    result.taus.push_back(run_data.mesh.tau);
    result.errors.push_back(err);
  }
  for (std::size_t i = 1; i < result.errors.size(); ++i) {
    result.orders.push_back(std::log(result.errors[i - 1] / result.errors[i]) /
                            std::log(result.taus[i - 1] / result.taus[i]));
  }
  return result;
}

State manufactured_solution(const Grid& grid, double t) {
  State v(static_cast<Eigen::Index>(grid.n));
  for (std::size_t i = 0; i < grid.n; ++i) {
    v[static_cast<Eigen::Index>(i)] = std::exp(-t) * std::sin(std::numbers::pi * grid.x(i) / grid.length);
  }
  return v;
}

std::vector<State> manufactured_forcing(const ProblemData& data) {
  const double lambda = data.lambda;
  const State shape = manufactured_solution(data.grid, 0.0);
  std::vector<State> f;
  f.reserve(data.mesh.steps);
  for (std::size_t n = 0; n < data.mesh.steps; ++n) {
    const double t = data.mesh.t(n + 1);
    const State v = std::exp(-t) * shape;
    // int_0^t lambda e^{-lambda (t - s)} e^{-s} ds
    const double memory_factor = std::abs(lambda - 1.0) < 1e-12
                                     ? t * std::exp(-t)
                                     : lambda * (std::exp(-t) - std::exp(-lambda * t)) / (lambda - 1.0);
    const State kv = data.u0 + memory_factor * shape;
    f.push_back(-v + data.a.apply(v) + data.b.apply(kv));
  }
  return f;
}

}  // namespace memincl
