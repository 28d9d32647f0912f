#include "memincl/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

namespace memincl {

Grid Grid::make(std::size_t n, double length) {
  if (n < 1) {
    throw std::invalid_argument("Grid: need at least one interior node");
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw std::invalid_argument("Grid: length must be positive and finite");
  }
  return Grid{n, length, length / static_cast<double>(n + 1)};
}

Exponents Exponents::from_p(double p) {
  if (!(p >= 2.0) || !std::isfinite(p)) {
    throw std::invalid_argument("Exponents: require 2 <= p < inf");
  }
  return Exponents{p, p == 2.0 ? 2.0 : p / (p - 1.0)};
}

double pairing(const State& g, const State& v, const Grid& grid) {
  return grid.h * g.dot(v);
}

double h_norm(const State& v, const Grid& grid) {
  return std::sqrt(grid.h * v.squaredNorm());
}

State forward_differences(const State& v, const Grid& grid) {
  const auto n = v.size();
  State d(n + 1);
  double prev = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    d[i] = (v[i] - prev) / grid.h;
    prev = v[i];
  }
  d[n] = (0.0 - prev) / grid.h;
  return d;
}

double va_norm(const State& v, const Grid& grid, double p) {
  const State d = forward_differences(v, grid);
  if (p == 2.0) {
    return std::sqrt(grid.h * d.squaredNorm());
  }
  // Scale by the largest difference so |x|^p cannot overflow.
  const double scale = d.cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    return 0.0;
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    sum += std::pow(std::abs(d[i]) / scale, p);
  }
  return scale * std::pow(grid.h * sum, 1.0 / p);
}

double b_norm(const State& v, const Matrix& b, const Grid& grid) {
  const double quad = pairing(b * v, v, grid);
  const double tol = 1e-12 * grid.h * b.cwiseAbs().maxCoeff() * v.squaredNorm();
  if (quad < -tol) {
    throw std::domain_error("b_norm: <Bv, v> is negative; B is not positive");
  }
  return std::sqrt(std::max(quad, 0.0));
}

State p_laplacian_stencil(const State& v, const Grid& grid, double p) {
  const State d = forward_differences(v, grid);
  State flux(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    flux[i] = p == 2.0 ? d[i] : std::pow(std::abs(d[i]), p - 2.0) * d[i];
  }
  State out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out[i] = -(flux[i + 1] - flux[i]) / grid.h;
  }
  return out;
}

Tridiagonal laplacian_tridiagonal(const Grid& grid) {
  Tridiagonal t(grid.n);
  const double inv_h2 = 1.0 / (grid.h * grid.h);
  t.diag.setConstant(2.0 * inv_h2);
  t.lower.setConstant(-inv_h2);
  t.upper.setConstant(-inv_h2);
  return t;
}

Matrix laplacian_matrix(const Grid& grid) { return laplacian_tridiagonal(grid).dense(); }

State tent_function(const Grid& grid) {
  State e(static_cast<Eigen::Index>(grid.n));
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    e[static_cast<Eigen::Index>(i)] = std::min(x, grid.length - x);
  }
  return e;
}

double laplacian_eigenvalue(const Grid& grid, std::size_t k) {
  const double theta = static_cast<double>(k) * std::numbers::pi / static_cast<double>(grid.n + 1);
  return (2.0 - 2.0 * std::cos(theta)) / (grid.h * grid.h);
}

State laplacian_eigenvector(const Grid& grid, std::size_t k) {
  State e(static_cast<Eigen::Index>(grid.n));
  for (std::size_t i = 0; i < grid.n; ++i) {
    e[static_cast<Eigen::Index>(i)] =
        std::sin(static_cast<double>(k) * std::numbers::pi * grid.x(i) / grid.length);
  }
  return e;
}

bool all_finite(const State& v) { return v.allFinite(); }

namespace {

State random_state(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  State v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = normal(rng);
  }
  return v;
}

// Ratio maximization over rays. `value` must be 0-homogeneous; `direction`
// returns a preconditioned ascent direction at a point normalized by
// `normalize`. Tracks the best value seen, so the result is nondecreasing
// in the iteration budget.
struct RayAscent {
  std::function<double(const State&)> value;
  std::function<State(const State&, double)> direction;
  std::function<bool(State&)> normalize;

  double run(State v, std::size_t iters) const {
    if (!normalize(v)) {
      return -std::numeric_limits<double>::infinity();
    }
    double best = value(v);
    double current = best;
    for (std::size_t it = 0; it < iters; ++it) {
      const State d = direction(v, current);
      if (!d.allFinite() || d.squaredNorm() == 0.0) {
        break;
      }
      const double scale = v.norm() / d.norm();
      double alpha = std::min(1.0, scale);
      bool improved = false;
      for (int halving = 0; halving < 60; ++halving, alpha *= 0.5) {
        State trial = v + alpha * d;
        if (!normalize(trial)) {
          continue;
        }
        const double val = value(trial);
        if (val > current) {
          v = std::move(trial);
          current = val;
          improved = true;
          break;
        }
      }
      if (!improved) {
        break;
      }
      best = std::max(best, current);
    }
    return best;
  }
};

}  // namespace

double dual_norm_estimate(const State& g, const NormSpec& norm, const Grid& grid,
                          const DualNormOptions& options, std::span<const State> hints) {
  if (g.isZero(0.0)) {
    return 0.0;
  }
  if (std::holds_alternative<HNorm>(norm)) {
    return h_norm(g, grid);
  }

  std::function<double(const State&)> size;
  std::function<State(const State&)> gradient;  // h-scaled gradient of size^p / p
  std::function<State(const State&)> precondition;
  if (const auto* va = std::get_if<VANorm>(&norm)) {
    const double p = va->p;
    const Tridiagonal lap = laplacian_tridiagonal(grid);
    size = [&grid, p](const State& v) { return va_norm(v, grid, p); };
    gradient = [&grid, p](const State& v) { return p_laplacian_stencil(v, grid, p); };
    precondition = [lap](const State& r) { return lap.solve(r); };
  } else {
    const Matrix& b = std::get<BNorm>(norm).matrix;
    const auto ldlt = std::make_shared<Eigen::LDLT<Matrix>>(b);
    size = [&grid, &b](const State& v) { return b_norm(v, b, grid); };
    gradient = [&b](const State& v) { return State(b * v); };
    precondition = [ldlt](const State& r) { return State(ldlt->solve(r)); };
  }

  RayAscent ascent;
  ascent.value = [&](const State& v) { return pairing(g, v, grid) / size(v); };
  ascent.normalize = [&](State& v) {
    const double s = size(v);
    if (!(s > 0.0) || !std::isfinite(s)) {
      return false;
    }
    v /= s;
    if (pairing(g, v, grid) < 0.0) {
      v = -v;
    }
    return true;
  };
  // At ||v|| = 1 the ratio gradient is proportional to g - J * grad(||v||^p / p).
  ascent.direction = [&](const State& v, double j) { return precondition(g - j * gradient(v)); };

  std::vector<State> starts;
  starts.push_back(precondition(g));
  starts.push_back(g);
  for (const auto& hint : hints) {
    starts.push_back(hint);
  }
  std::mt19937_64 rng(options.seed);
  for (std::size_t r = 0; r < options.random_starts; ++r) {
    starts.push_back(random_state(rng, grid.n));
  }

  double best = 0.0;
  for (const auto& start : starts) {
    best = std::max(best, ascent.run(start, options.iters));
  }
  return best;
}

double embedding_constant(const Grid& grid, double p, const EmbeddingOptions& options) {
  const Tridiagonal lap = laplacian_tridiagonal(grid);

  RayAscent ascent;
  ascent.value = [&](const State& v) { return h_norm(v, grid) / va_norm(v, grid, p); };
  ascent.normalize = [&](State& v) {
    const double s = va_norm(v, grid, p);
    if (!(s > 0.0) || !std::isfinite(s)) {
      return false;
    }
    v /= s;
    return true;
  };
  // Gradient of log(||v||_H / ||v||_VA) at ||v||_VA = 1, preconditioned by the Laplacian.
  ascent.direction = [&](const State& v, double) {
    const double hn2 = grid.h * v.squaredNorm();
    return lap.solve(v / hn2 - p_laplacian_stencil(v, grid, p));
  };

  // Inverse iteration gives the exact maximizer for p = 2 and a good start otherwise.
  State inv = tent_function(grid);
  for (int it = 0; it < 200; ++it) {
    inv = lap.solve(inv);
    inv /= inv.norm();
  }

  std::vector<State> starts{inv, tent_function(grid)};
  std::mt19937_64 rng(options.seed);
  for (std::size_t r = 0; r < options.random_starts; ++r) {
    starts.push_back(random_state(rng, grid.n));
  }
  double best = 0.0;
  for (const auto& start : starts) {
    best = std::max(best, ascent.run(start, options.iters));
  }
  return best;
}

}  // namespace memincl
