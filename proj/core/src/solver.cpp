#include "memincl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace memincl {

void ProblemData::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("ProblemData: lambda must be positive");
  }
  const auto n = static_cast<Eigen::Index>(grid.n);
  if (u0.size() != n || v0.size() != n) {
    throw std::invalid_argument("ProblemData: initial data does not match grid");
  }
  if (!u0.allFinite() || !v0.allFinite()) {
    throw std::invalid_argument("ProblemData: initial data must be finite");
  }
  if (a.grid().n != grid.n || b.grid().n != grid.n || field.grid.n != grid.n) {
    throw std::invalid_argument("ProblemData: operator grids differ");
  }
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double flux_derivative(double s, double p) { return p == 2.0 ? 1.0 : (p - 1.0) * std::pow(std::abs(s), p - 2.0); }

// Size of the terms summed in A(v); sets the round-off floor of the residual.
double a_term_scale(const OperatorA& a, const State& v, const State& av) {
  const Grid& grid = a.grid();
  if (const auto* pl = std::get_if<PLaplacianA>(&a.kind())) {
    const State d = forward_differences(v, grid);
    State mag(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      mag[i] = (std::pow(std::abs(d[i]), pl->p - 1.0) + std::pow(std::abs(d[i + 1]), pl->p - 1.0)) / grid.h;
    }
    return h_norm(mag, grid);
  }
  if (const auto* lin = std::get_if<LinearA>(&a.kind())) {
    return h_norm(State(lin->matrix.cwiseAbs() * v.cwiseAbs()), grid);
  }
  return h_norm(av, grid);
}

// Convex energy whose h-scaled gradient is v + tau P(v) - rhs.
double p_energy(const State& v, const State& rhs, double tau, double p, const Grid& grid) {
  const State d = forward_differences(v, grid);
  double flux = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) flux += std::pow(std::abs(d[i]), p);
  return grid.h * (0.5 * v.squaredNorm() - rhs.dot(v) + tau / p * flux);
}

}  // namespace

ImplicitStepper::ImplicitStepper(const OperatorA& a, double tau, double tol, std::size_t max_iter)
    : a_(&a), tau_(tau), tol_(tol), max_iter_(max_iter) {
  if (!(tau > 0.0) || !(tol > 0.0)) {
    throw std::invalid_argument("ImplicitStepper: tau and tol must be positive");
  }
  if (const auto* lin = std::get_if<LinearA>(&a.kind())) {
    const auto n = lin->matrix.rows();
    linear_lu_.emplace(Matrix::Identity(n, n) + tau * lin->matrix);
  }
}

double ImplicitStepper::residual_norm(const State& v, const State& rhs) const {
  return h_norm(v + tau_ * a_->apply(v) - rhs, a_->grid());
}

StepResult ImplicitStepper::solve(const State& rhs, const State& guess) const {
  const Grid& grid = a_->grid();
  const auto n = static_cast<Eigen::Index>(grid.n);

  auto floor_of = [&](const State& v, const State& av) {
    return 256.0 * kEps * (h_norm(v, grid) + h_norm(rhs, grid) + tau_ * a_term_scale(*a_, v, av));
  };

  if (linear_lu_) {
    State v = linear_lu_->solve(rhs);
    // One refinement sweep keeps the residual at round-off for stiff tau A.
    const State r = v + tau_ * a_->apply(v) - rhs;
    v -= linear_lu_->solve(r);
    const State av = a_->apply(v);
    const double res = h_norm(v + tau_ * av - rhs, grid);
    if (!(res <= std::max(tol_, floor_of(v, av)))) {
      throw NonlinearSolveError("implicit step: linear solve residual above tolerance", res);
    }
    return {std::move(v), {1, res}};
  }

  State v = guess;
  State av = a_->apply(v);
  State r = v + tau_ * av - rhs;
  double rn = h_norm(r, grid);

  for (std::size_t it = 0; it <= max_iter_; ++it) {
    if (rn <= std::max(tol_, floor_of(v, av))) {
      return {std::move(v), {it, rn}};
    }
    if (it == max_iter_) {
      break;
    }

    State step;
    if (const auto* pl = std::get_if<PLaplacianA>(&a_->kind())) {
      const State d = forward_differences(v, grid);
      const double c = tau_ / (grid.h * grid.h);
      Tridiagonal jac(grid.n);
      for (Eigen::Index i = 0; i < n; ++i) {
        jac.diag[i] = 1.0 + c * (flux_derivative(d[i], pl->p) + flux_derivative(d[i + 1], pl->p));
        if (i + 1 < n) {
          const double off = -c * flux_derivative(d[i + 1], pl->p);
          jac.upper[i] = off;
          jac.lower[i] = off;
        }
      }
      step = jac.solve(-r);
    } else {
      // Central-difference Jacobian for custom operators.
      Matrix jac = Matrix::Identity(n, n);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double eps = 1e-7 * std::max(1.0, std::abs(v[j]));
        State plus = v;
        State minus = v;
        plus[j] += eps;
        minus[j] -= eps;
        jac.col(j) += tau_ * (a_->apply(plus) - a_->apply(minus)) / (2.0 * eps);
      }
      step = jac.partialPivLu().solve(-r);
    }

    // The p-Laplacian step minimizes a convex energy, which is the merit
    // function; the residual decrease test covers the round-off regime.
    const auto* pl = std::get_if<PLaplacianA>(&a_->kind());
    const double e0 = pl ? p_energy(v, rhs, tau_, pl->p, grid) : 0.0;
    const double slope = pl ? grid.h * r.dot(step) : 0.0;
    double alpha = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, alpha *= 0.5) {
      State trial = v + alpha * step;
      State atrial = a_->apply(trial);
      State rtrial = trial + tau_ * atrial - rhs;
      const double rt = h_norm(rtrial, grid);
      bool ok = std::isfinite(rt) && rt < (1.0 - 1e-4 * alpha) * rn;
      if (!ok && pl && std::isfinite(rt)) {
        ok = p_energy(trial, rhs, tau_, pl->p, grid) <= e0 + 1e-4 * alpha * slope;
      }
      if (ok) {
        v = std::move(trial);
        av = std::move(atrial);
        r = std::move(rtrial);
        rn = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      break;
    }
  }
  std::ostringstream os;
  os << "implicit step: Newton did not reach tolerance " << tol_ << " (residual " << rn << ")";
  throw NonlinearSolveError(os.str(), rn);
}

StepResult implicit_step_A(const State& rhs, double tau, const OperatorA& a, double tol, std::size_t max_iter) {
  const ImplicitStepper stepper(a, tau, tol, max_iter);
  return stepper.solve(rhs, rhs);
}

namespace {

template <class MemoryTerm>
Trajectory march(const std::vector<State>& f, const ProblemData& data, const SolverOptions& options,
                 MemoryTerm&& memory_term) {
  data.validate();
  const TimeMesh& mesh = data.mesh;
  if (f.size() < mesh.steps) {
    throw std::invalid_argument("solve: forcing has fewer entries than steps");
  }
  const ImplicitStepper stepper(data.a, mesh.tau, options.tol_newton, options.max_newton_iter);
  const auto n = static_cast<Eigen::Index>(data.grid.n);

  Trajectory traj;
  traj.v.reserve(mesh.nodes());
  traj.w.reserve(mesh.nodes());
  traj.v.push_back(data.v0);
  traj.w.push_back(State::Zero(n));
  traj.f.assign(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(mesh.steps));
  traj.newton.reserve(mesh.steps);

  for (std::size_t step = 0; step < mesh.steps; ++step) {
    const State& vn = traj.v.back();
    const State rhs = vn + mesh.tau * (f[step] - data.b.apply(memory_term(traj, step)));
    State guess = vn;
    if (options.guess_shift != 0.0) {
      guess.array() += options.guess_shift;
    }
    StepResult result;
    try {
      result = stepper.solve(rhs, guess);
    } catch (const NonlinearSolveError& e) {
      std::ostringstream os;
      os << e.what() << " at step " << step;
      throw NonlinearSolveError(os.str(), e.residual(), step);
    }
    traj.w.push_back(memory_step(traj.w.back(), result.v, data.lambda, mesh.tau));
    traj.v.push_back(std::move(result.v));
    traj.newton.push_back(result.stats);
  }
  return traj;
}

}  // namespace

Trajectory solve_single_valued(const std::vector<State>& f, const ProblemData& data, const SolverOptions& options) {
  return march(f, data, options,
               [&](const Trajectory& traj, std::size_t step) -> State { return traj.w[step] + data.u0; });
}

Trajectory solve_without_memory(const std::vector<State>& f, const ProblemData& data, const SolverOptions& options) {
  return march(f, data, options,
               [&](const Trajectory& traj, std::size_t step) -> State { return traj.v[step] + data.u0; });
}

FixedPointResult fixed_point_iterate(const std::vector<State>& f0, const ProblemData& data,
                                     double truncation_radius, const SelectionRule& rule,
                                     const FixedPointOptions& options) {
  const TimeMesh& mesh = data.mesh;
  if (f0.size() < mesh.steps) {
    throw std::invalid_argument("fixed_point_iterate: initial selection shorter than mesh");
  }
  for (std::size_t i = 0; i < mesh.steps; ++i) {
    if (!f0[i].allFinite()) {
      throw std::invalid_argument("fixed_point_iterate: initial selection must be finite");
    }
  }
  const SetField truncated = truncate(data.field, truncation_radius);

  FixedPointResult result;
  std::vector<State> f(f0.begin(), f0.begin() + static_cast<std::ptrdiff_t>(mesh.steps));
  for (std::size_t k = 0;; ++k) {
    Trajectory traj = solve_single_valued(f, data, options.solver);
    std::vector<State> next(mesh.steps);
    double residual = 0.0;
    for (std::size_t n = 0; n < mesh.steps; ++n) {
      const SetValue set = evaluate(truncated, mesh.t(n), traj.v[n]);
      next[n] = select(set, rule, f[n]);
      residual = std::max(residual, h_norm(next[n] - f[n], data.grid));
    }
    result.residual_history.push_back(residual);
    if (residual <= options.tol_fp) {
      result.f_star = std::move(f);
      result.v_star = std::move(traj);
      result.iterations = k;
      result.converged = true;
      return result;
    }
    if (k == options.k_max) {
      result.f_star = std::move(next);
      result.v_star = solve_single_valued(result.f_star, data, options.solver);
      result.iterations = k + 1;
      result.converged = false;
      return result;
    }
    f = std::move(next);
  }
}

Trajectory marching_solve(const ProblemData& data, const SelectionRule& rule, const SolverOptions& options) {
  data.validate();
  const TimeMesh& mesh = data.mesh;
  const ImplicitStepper stepper(data.a, mesh.tau, options.tol_newton, options.max_newton_iter);
  const auto n = static_cast<Eigen::Index>(data.grid.n);

  Trajectory traj;
  traj.v.push_back(data.v0);
  traj.w.push_back(State::Zero(n));
  std::optional<State> prev;
  if (std::holds_alternative<ProjectPrevious>(rule)) {
    prev = State::Zero(n);
  }
  for (std::size_t step = 0; step < mesh.steps; ++step) {
    const State& vn = traj.v.back();
    State fn = select(evaluate(data.field, mesh.t(step), vn), rule, prev);
    const State rhs = vn + mesh.tau * (fn - data.b.apply(traj.w.back() + data.u0));
    State guess = vn;
    if (options.guess_shift != 0.0) {
      guess.array() += options.guess_shift;
    }
    StepResult result;
    try {
      result = stepper.solve(rhs, guess);
    } catch (const NonlinearSolveError& e) {
      std::ostringstream os;
      os << e.what() << " at step " << step;
      throw NonlinearSolveError(os.str(), e.residual(), step);
    }
    traj.w.push_back(memory_step(traj.w.back(), result.v, data.lambda, mesh.tau));
    traj.v.push_back(std::move(result.v));
    traj.newton.push_back(result.stats);
    prev = fn;
    traj.f.push_back(std::move(fn));
  }
  return traj;
}

double equation_residual(const Trajectory& traj, const ProblemData& data, std::size_t n) {
  const double tau = data.mesh.tau;
  const State r = (traj.v[n + 1] - traj.v[n]) / tau + data.a.apply(traj.v[n + 1]) +
                  data.b.apply(traj.w[n] + data.u0) - traj.f[n];
  return h_norm(r, data.grid);
}

Certificate residual_certificate(const Trajectory& traj, const ProblemData& data, const CertificateTolerances& tols) {
  const TimeMesh& mesh = data.mesh;
  Certificate cert;
  if (traj.v.size() != mesh.nodes() || traj.w.size() != mesh.nodes() || traj.f.size() != mesh.steps) {
    return cert;
  }
  for (std::size_t n = 0; n < mesh.steps; ++n) {
    const double dist = distance_to_set(evaluate(data.field, mesh.t(n), traj.v[n]), traj.f[n]);
    if (dist > cert.max_set_distance || !std::isfinite(dist)) {
      cert.max_set_distance = dist;
      cert.worst_set_node = n;
    }
    const double eq = equation_residual(traj, data, n);
    if (eq > cert.max_equation_residual || !std::isfinite(eq)) {
      cert.max_equation_residual = eq;
      cert.worst_equation_step = n;
    }
  }
  cert.inclusion_ok = cert.max_set_distance <= tols.set;
  cert.equation_ok = cert.max_equation_residual <= tols.equation;
  const bool v0_exact = traj.v[0].size() == data.v0.size() && (traj.v[0].array() == data.v0.array()).all();
  const bool w0_zero = (traj.w[0].array() == 0.0).all();
  cert.initial_ok = v0_exact && w0_zero;
  return cert;
}

}  // namespace memincl
