#pragma once

// Post-processing of computed trajectories: the discrete energy identity and
// its coercive inequality form, the explicit Gronwall chain with every
// constant tracked, the a priori bounds it implies, and convergence studies.

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "memincl/operators.hpp"
#include "memincl/setvalued.hpp"
#include "memincl/solver.hpp"

namespace memincl {

class InvalidConstantsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fitted operator constants consumed by the estimates. mu_B and beta_B are
/// in the H frame (see check_B); C_e bounds ||v||_H <= C_e ||v||_VA.
struct OperatorConstants {
  double mu_A = 1.0;
  double c_A = 0.0;
  double beta_A = 1.0;
  double mu_B = 1.0;
  double beta_B = 1.0;
  double C_e = 1.0;
};

struct OperatorChecks {
  AssumptionReport monotone;
  AssumptionReport growth;
  AssumptionReport coercive;
  AssumptionReport hemicontinuity;
  AssumptionReport b;
  OperatorConstants constants;

  [[nodiscard]] bool pass() const {
    return monotone.pass && growth.pass && coercive.pass && hemicontinuity.pass && b.pass;
  }
};

/// Runs every operator checker on the problem's A and B and collects the
/// fitted constants, including the embedding constant of the grid.
[[nodiscard]] OperatorChecks fit_operator_constants(const ProblemData& data, const CheckOptions& options = {});

struct EnergyLedger {
  // Per node n = 0..N.
  std::vector<double> kinetic;              // 1/2 ||v_n||_H^2
  std::vector<double> memory;               // 1/(2 lambda) ||w_n + u0||_B^2
  std::vector<double> coercivity;           // mu_A sum_{m<n} tau ||v_{m+1}||_VA^p
  std::vector<double> memory_dissipation;   // sum_{m<n} tau ||w_m + u0||_B^2
  std::vector<double> forcing;              // sum_{m<n} tau <f_m, v_{m+1}>
  std::vector<double> coupling;             // sum_{m<n} tau <B(w_m + u0), u0>
  std::vector<double> identity_slack;
  std::vector<double> inequality_lhs;
  std::vector<double> inequality_rhs;
  std::vector<double> inequality_slack;     // rhs - lhs, nonnegative when the chain holds

  [[nodiscard]] double max_abs_identity_slack() const;
  [[nodiscard]] double final_identity_slack() const;
  [[nodiscard]] double min_inequality_slack() const;
};

/// Identity slack at node n: the discrete pairing sum
///   sum_{m<n} <v_{m+1} - v_m, v_{m+1}> + tau <B(w_m + u0), v_{m+1}>
/// minus the continuous right side
///   1/2 ||v_n||^2 - 1/2 ||v0||^2 + 1/(2 lambda)(||w_n + u0||_B^2 - ||u0||_B^2)
///   + sum tau ||w_m + u0||_B^2 - sum tau <B(w_m + u0), u0>.
/// It vanishes at rate tau on smooth runs. The inequality form uses the exact
/// discrete memory identity (weight tau / (2 alpha), alpha = 1 - e^{-lambda tau})
/// and keeps the explicit-memory defect sum tau ||Delta W||_B^2 / (2 alpha) on
/// the right.
[[nodiscard]] EnergyLedger energy_ledger(const Trajectory& traj, const ProblemData& data,
                                         const OperatorConstants& constants);

struct AprioriConstants {
  OperatorConstants ops;
  double p = 2.0;
  double q = 2.0;
  double C_Y = 0.0;
  double R0 = 0.0;
  double C1 = 0.0;
  double M1 = 0.0;
  double M2 = 0.0;     // bound of sum tau ||v||_VA^p
  double M2_sq = 0.0;  // bound of sum tau ||v||_VA^2 (Hoelder from M2)
  double M2_B = 0.0;   // bound of ||w_n + u0||_B^2
  double M3 = 0.0;
  double a_lq = 0.0;   // ||a||_{L^q(0,T)}
};

/// Gronwall chain. Throws InvalidConstantsError for mu_A <= 0, b <= 0 or
/// mu_B <= 0.
[[nodiscard]] AprioriConstants gronwall_constants(const ProblemData& data, const GrowthEnvelope& env,
                                                  const OperatorConstants& ops);

struct BoundCheck {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  [[nodiscard]] double margin() const { return bound - value; }
  [[nodiscard]] bool holds() const { return value <= bound * (1.0 + 1e-12) + 1e-300; }
};

struct AprioriReport {
  BoundCheck sup_h;        // max_n ||v_n||_H^2 <= M1
  BoundCheck va_square;    // sum tau ||v_{m+1}||_VA^2 <= M2_sq
  BoundCheck va_power;     // sum tau ||v_{m+1}||_VA^p <= M2
  BoundCheck memory_b;     // max_n ||w_n + u0||_B^2 <= M2_B
  std::optional<std::string> first_violation;

  [[nodiscard]] bool pass() const { return !first_violation.has_value(); }
  [[nodiscard]] double min_margin() const;
  [[nodiscard]] std::vector<BoundCheck> all() const { return {sup_h, va_square, va_power, memory_b}; }
};

[[nodiscard]] AprioriReport verify_apriori(const Trajectory& traj, const AprioriConstants& k, const ProblemData& data);

struct AnalyticReference {
  std::function<State(double t)> solution;
};
struct FineGridReference {
  std::size_t refinement = 64;  // fine steps = refinement * finest steps
};
using ConvergenceReference = std::variant<AnalyticReference, FineGridReference>;

/// Runs one solve on the mesh carried by `data`.
using ConvergenceRunner = std::function<Trajectory(const ProblemData& data)>;

struct ConvergenceResult {
  std::vector<std::size_t> steps;
  std::vector<double> taus;
  std::vector<double> errors;  // max over nodes of ||v_n - ref(t_n)||_H
  std::vector<double> orders;  // successive log error ratios over log tau ratios

  [[nodiscard]] double fitted_order() const;
};

/// `steps` strictly increasing (tau strictly decreasing), at least three.
/// Solve failures propagate.
[[nodiscard]] ConvergenceResult convergence_study(const ProblemData& data, const std::vector<std::size_t>& steps,
                                                  const ConvergenceRunner& runner,
                                                  const ConvergenceReference& reference);

/// Least-squares slope of log(y) against log(x).
[[nodiscard]] double fitted_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Manufactured solution v*(t, x) = e^{-t} sin(pi x / L) on the grid.
[[nodiscard]] State manufactured_solution(const Grid& grid, double t);

/// Forcing f_n = v*'(t_{n+1}) + A v*(t_{n+1}) + B (K v*)(t_{n+1}) for the
/// mesh of `data`, with K v* in closed form.
[[nodiscard]] std::vector<State> manufactured_forcing(const ProblemData& data);

/// max_n ||v_n - u_n||_H over two trajectories on the same mesh.
[[nodiscard]] double max_node_distance(const std::vector<State>& a, const std::vector<State>& b, const Grid& grid);

}  // namespace memincl
