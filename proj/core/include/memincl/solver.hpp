#pragma once

// Time discretization of
//   v' + A v + B K v  in  F(t, v),   v(0) = v0,
// with the memory state w = Kv - u0 carried along by its exact exponential
// update. One step n -> n+1 reads
//   (v_{n+1} - v_n) / tau + A v_{n+1} + B (w_n + u0) = f_n,
//   w_{n+1} = e^{-lambda tau} w_n + (1 - e^{-lambda tau}) v_{n+1},
// with A implicit (damped Newton) and the memory term explicit. The
// selection f_n lies in F(t_n, v_n).

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "memincl/kernel.hpp"
#include "memincl/operators.hpp"
#include "memincl/setvalued.hpp"
#include "memincl/spaces.hpp"

namespace memincl {

struct ProblemData {
  Grid grid;
  TimeMesh mesh;
  double lambda = 1.0;
  State u0;
  State v0;
  OperatorA a;
  OperatorB b;
  SetField field;
  Exponents exps;

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
  [[nodiscard]] MemoryParams memory() const { return MemoryParams{lambda, u0, mesh.final_time}; }
};

class NonlinearSolveError : public std::runtime_error {
 public:
  NonlinearSolveError(const std::string& what, double residual, std::size_t step = 0)
      : std::runtime_error(what), residual_(residual), step_(step) {}
  [[nodiscard]] double residual() const { return residual_; }
  [[nodiscard]] std::size_t step() const { return step_; }

 private:
  double residual_;
  std::size_t step_;
};

struct NewtonStats {
  std::size_t iterations = 0;
  double residual = 0.0;
};

struct Trajectory {
  std::vector<State> v;  // N + 1 nodes, v[0] = v0
  std::vector<State> w;  // N + 1 nodes, w[0] = 0
  std::vector<State> f;  // N selections, f[n] drives step n -> n+1
  std::vector<NewtonStats> newton;
};

struct SolverOptions {
  double tol_newton = 1e-12;
  std::size_t max_newton_iter = 200;
  /// Added to the Newton initial guess (v_n); used to probe uniqueness.
  double guess_shift = 0.0;
};

struct StepResult {
  State v;
  NewtonStats stats;
};

/// Solves v + tau A(v) = rhs. Linear A uses a cached LU factorization, the
/// p-Laplacian a tridiagonal Newton iteration with halving line search, and
/// custom operators Newton with a finite-difference Jacobian.
class ImplicitStepper {
 public:
  ImplicitStepper(const OperatorA& a, double tau, double tol, std::size_t max_iter);

  [[nodiscard]] StepResult solve(const State& rhs, const State& guess) const;
  [[nodiscard]] double residual_norm(const State& v, const State& rhs) const;

 private:
  const OperatorA* a_;
  double tau_;
  double tol_;
  std::size_t max_iter_;
  std::optional<Eigen::PartialPivLU<Matrix>> linear_lu_;
};

/// One backward-Euler substep; throws NonlinearSolveError after max_iter.
[[nodiscard]] StepResult implicit_step_A(const State& rhs, double tau, const OperatorA& a, double tol,
                                         std::size_t max_iter);

/// G(f): marches the single-valued problem driven by `f` (N entries).
/// Bitwise deterministic.
[[nodiscard]] Trajectory solve_single_valued(const std::vector<State>& f, const ProblemData& data,
                                             const SolverOptions& options = {});

/// Same scheme with the memory replaced by its lambda -> infinity limit
/// Kv -> u0 + v: (v_{n+1} - v_n)/tau + A v_{n+1} + B (v_n + u0) = f_n.
[[nodiscard]] Trajectory solve_without_memory(const std::vector<State>& f, const ProblemData& data,
                                              const SolverOptions& options = {});

struct FixedPointOptions {
  std::size_t k_max = 100;
  double tol_fp = 1e-10;
  SolverOptions solver;
};

struct FixedPointResult {
  std::vector<State> f_star;
  Trajectory v_star;  // G(f_star)
  std::size_t iterations = 0;
  std::vector<double> residual_history;
  bool converged = false;
};

/// Iterates f_{k+1}(t_n) = select(F^(t_n, G(f_k)(t_n)), rule, f_k(t_n)) on the
/// field truncated at `truncation_radius`, until max_n ||f_{k+1} - f_k||_H <=
/// tol_fp. `iterations` counts selection updates before the stationary pass.
/// Non-convergence is reported, never thrown.
[[nodiscard]] FixedPointResult fixed_point_iterate(const std::vector<State>& f0, const ProblemData& data,
                                                   double truncation_radius, const SelectionRule& rule,
                                                   const FixedPointOptions& options = {});

/// One pass: f_n = select(F(t_n, v_n), rule, f_{n-1}) then step. At n = 0
/// ProjectPrevious projects the zero vector.
[[nodiscard]] Trajectory marching_solve(const ProblemData& data, const SelectionRule& rule,
                                        const SolverOptions& options = {});

struct CertificateTolerances {
  double set = 1e-9;
  double equation = 1e-8;
};

struct Certificate {
  double max_set_distance = 0.0;
  double max_equation_residual = 0.0;
  bool inclusion_ok = false;
  bool equation_ok = false;
  bool initial_ok = false;
  std::size_t worst_set_node = 0;
  std::size_t worst_equation_step = 0;

  [[nodiscard]] bool pass() const { return inclusion_ok && equation_ok && initial_ok; }
};

/// (i) f_n in F(t_n, v_n); (ii) the discrete equation residual in the H-norm;
/// (iii) v[0] = v0 and w[0] = 0 exactly.
[[nodiscard]] Certificate residual_certificate(const Trajectory& traj, const ProblemData& data,
                                               const CertificateTolerances& tols = {});

/// ||(v_{n+1} - v_n)/tau + A v_{n+1} + B(w_n + u0) - f_n||_H for step n.
[[nodiscard]] double equation_residual(const Trajectory& traj, const ProblemData& data, std::size_t n);

}  // namespace memincl
