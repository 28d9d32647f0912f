#pragma once

// Exponential memory operator
//   (Kv)(t) = u0 + int_0^t k(t - s) v(s) ds,   k(z) = lambda exp(-lambda z).
//
// The stored quantity is the memory state w = Kv - u0, which satisfies
// w(0) = 0 and the local ODE w' = lambda (v - w). With v piecewise constant
// on each step the exact update is
//   w+ = e^{-lambda tau} w + (1 - e^{-lambda tau}) v,
// and iterating it reproduces the direct convolution sum exactly.

#include <cstddef>
#include <span>
#include <vector>

#include "memincl/spaces.hpp"

namespace memincl {

/// Uniform time mesh t_n = n * tau, n = 0..steps.
struct TimeMesh {
  std::size_t steps = 1;
  double final_time = 1.0;
  double tau = 1.0;

  static TimeMesh make(double final_time, std::size_t steps);

  [[nodiscard]] double t(std::size_t n) const {
    return n == steps ? final_time : static_cast<double>(n) * tau;
  }
  [[nodiscard]] std::size_t nodes() const { return steps + 1; }
};

struct MemoryParams {
  double lambda = 1.0;
  State u0;
  double final_time = 1.0;
};

/// lambda * exp(-lambda z). Throws std::domain_error for z < 0.
[[nodiscard]] double kernel_eval(double z, double lambda);

/// ||k||_{L1(0,T)} = 1 - exp(-lambda T).
[[nodiscard]] double l1_kernel_norm(double lambda, double final_time);

/// O(N^2) reference: w_n = sum_{j<n} (e^{-lambda(t_n - t_{j+1})} - e^{-lambda(t_n - t_j)}) v_j,
/// the exact convolution of the left piecewise-constant interpolant. `v`
/// holds one value per mesh node (the last one is unused).
[[nodiscard]] std::vector<State> apply_k_direct(std::span<const State> v, const MemoryParams& mp,
                                                const TimeMesh& mesh);

/// Exact update of w' = lambda (v - w) over a step with constant v.
[[nodiscard]] State memory_step(const State& w, const State& v, double lambda, double tau);

/// O(N) route: memory_step iterated from w_0 = 0 with v_j on step j.
[[nodiscard]] std::vector<State> apply_k_recurrence(std::span<const State> v, const MemoryParams& mp,
                                                    const TimeMesh& mesh);

/// max over interior nodes of || (w_{n+1} - w_{n-1}) / (2 tau) - lambda (v_n - w_n) ||_H.
/// Adding u0 to w does not change the difference quotient.
[[nodiscard]] double check_relation5(std::span<const State> v, std::span<const State> w,
                                     const MemoryParams& mp, const TimeMesh& mesh, const Grid& grid);

struct KernelBoundReport {
  // ||Kv - u0||_{L2(0,T;H)} <= ||k||_{L1(0,T)} ||v||_{L2(0,T;H)}
  double l2_lhs = 0.0;
  double l2_rhs = 0.0;
  // ||Kv - u0||_{C([0,T];H)} <= lambda ||v||_{L1(0,T;H)}
  double c_lhs = 0.0;
  double c_rhs = 0.0;
  bool l2_ok = true;
  bool c_ok = true;

  [[nodiscard]] double l2_slack() const { return l2_rhs - l2_lhs; }
  [[nodiscard]] double c_slack() const { return c_rhs - c_lhs; }
  [[nodiscard]] double slack() const { return l2_slack() < c_slack() ? l2_slack() : c_slack(); }
};

/// Both convolution inequalities with left-rectangle quadrature over n = 0..N-1.
/// `w` must come from apply_k_direct (or the equivalent recurrence) on `v`.
[[nodiscard]] KernelBoundReport verify_lemma_bounds(std::span<const State> v, std::span<const State> w,
                                              const MemoryParams& mp, const TimeMesh& mesh,
                                              const Grid& grid);

}  // namespace memincl
