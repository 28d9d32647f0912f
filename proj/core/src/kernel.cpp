#include "memincl/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace memincl {

TimeMesh TimeMesh::make(double final_time, std::size_t steps) {
  if (!(final_time > 0.0) || !std::isfinite(final_time)) {
    throw std::invalid_argument("TimeMesh: final time must be positive");
  }
  if (steps < 1) {
    throw std::invalid_argument("TimeMesh: need at least one step");
  }
  return TimeMesh{steps, final_time, final_time / static_cast<double>(steps)};
}

double kernel_eval(double z, double lambda) {
  if (z < 0.0) {
    throw std::domain_error("kernel_eval: z must be nonnegative");
  }
  return lambda * std::exp(-lambda * z);
}

double l1_kernel_norm(double lambda, double final_time) { return -std::expm1(-lambda * final_time); }

std::vector<State> apply_k_direct(std::span<const State> v, const MemoryParams& mp, const TimeMesh& mesh) {
  if (v.size() < mesh.nodes() - 1) {
    throw std::invalid_argument("apply_k_direct: trajectory shorter than mesh");
  }
  const Eigen::Index dim = v.empty() ? 0 : v.front().size();
  const double lambda = mp.lambda;
  const double tau = mesh.tau;
  const double one_step = -std::expm1(-lambda * tau);

  std::vector<State> w(mesh.nodes(), State::Zero(dim));
  for (std::size_t n = 1; n < mesh.nodes(); ++n) {
    State acc = State::Zero(dim);
    for (std::size_t j = 0; j < n; ++j) {
      // e^{-lambda (t_n - t_{j+1})} - e^{-lambda (t_n - t_j)} on a uniform mesh.
      const double weight = std::exp(-lambda * tau * static_cast<double>(n - j - 1)) * one_step;
      acc += weight * v[j];
    }
    w[n] = std::move(acc);
  }
  return w;
}

State memory_step(const State& w, const State& v, double lambda, double tau) {
  const double decay = std::exp(-lambda * tau);
  const double gain = -std::expm1(-lambda * tau);
  return decay * w + gain * v;
}

std::vector<State> apply_k_recurrence(std::span<const State> v, const MemoryParams& mp,
                                      const TimeMesh& mesh) {
  if (v.size() < mesh.nodes() - 1) {
    throw std::invalid_argument("apply_k_recurrence: trajectory shorter than mesh");
  }
  const Eigen::Index dim = v.empty() ? 0 : v.front().size();
  std::vector<State> w;
  w.reserve(mesh.nodes());
  w.emplace_back(State::Zero(dim));
  for (std::size_t n = 0; n < mesh.steps; ++n) {
    w.push_back(memory_step(w.back(), v[n], mp.lambda, mesh.tau));
  }
  return w;
}

double check_relation5(std::span<const State> v, std::span<const State> w, const MemoryParams& mp,
                       const TimeMesh& mesh, const Grid& grid) {
  if (v.size() < mesh.nodes() || w.size() < mesh.nodes()) {
    throw std::invalid_argument("check_relation5: trajectories not aligned with mesh");
  }
  double worst = 0.0;
  for (std::size_t n = 1; n + 1 < mesh.nodes(); ++n) {
    const State derivative = (w[n + 1] - w[n - 1]) / (2.0 * mesh.tau);
    const State rhs = mp.lambda * (v[n] - w[n]);
    worst = std::max(worst, h_norm(derivative - rhs, grid));
  }
  return worst;
}

KernelBoundReport verify_lemma_bounds(std::span<const State> v, std::span<const State> w,
                                const MemoryParams& mp, const TimeMesh& mesh, const Grid& grid) {
  if (v.size() < mesh.steps || w.size() < mesh.nodes()) {
    throw std::invalid_argument("verify_lemma_bounds: trajectories not aligned with mesh");
  }
  double w_sq = 0.0;
  double v_sq = 0.0;
  double v_l1 = 0.0;
  double w_max = 0.0;
  for (std::size_t n = 0; n < mesh.steps; ++n) {
    const double wn = h_norm(w[n], grid);
    const double vn = h_norm(v[n], grid);
    w_sq += mesh.tau * wn * wn;
    v_sq += mesh.tau * vn * vn;
    v_l1 += mesh.tau * vn;
  }
  for (std::size_t n = 0; n < mesh.nodes(); ++n) {
    w_max = std::max(w_max, h_norm(w[n], grid));
  }

  KernelBoundReport report;
  report.l2_lhs = std::sqrt(w_sq);
  report.l2_rhs = l1_kernel_norm(mp.lambda, mesh.final_time) * std::sqrt(v_sq);
  report.c_lhs = w_max;
  report.c_rhs = mp.lambda * v_l1;
  constexpr double kTolerance = 1e-10;
  report.l2_ok = report.l2_slack() >= -kTolerance;
  report.c_ok = report.c_slack() >= -kTolerance;
  return report;
}

}  // namespace memincl
