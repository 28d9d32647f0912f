#pragma once

// Discrete function spaces on a uniform 1D Dirichlet grid.
//
// One vector space (values at the n interior nodes) carries three norms:
//   ||v||_H   = sqrt(h * sum v_i^2)                      (discrete L2)
//   ||v||_VA  = (h * sum |(v_{i+1}-v_i)/h|^p)^(1/p)      (discrete W_0^{1,p})
//   ||v||_B   = <Bv, v>^(1/2)                             (energy norm of B)
// and the duality pairing <g, v> = h * sum g_i v_i. Boundary values are
// ghost zeros.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <variant>

#include <Eigen/Dense>

#include "memincl/tridiagonal.hpp"

namespace memincl {

using State = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Grid {
  std::size_t n = 1;     // interior nodes
  double length = 1.0;   // domain length
  double h = 0.5;        // spacing length / (n + 1)

  /// Throws std::invalid_argument unless n >= 1 and length > 0.
  static Grid make(std::size_t n, double length);

  /// Position of interior node i (0-based), i.e. (i + 1) * h.
  [[nodiscard]] double x(std::size_t i) const { return static_cast<double>(i + 1) * h; }
};

/// Conjugate pair 1/p + 1/q = 1 with 2 <= p < inf.
struct Exponents {
  double p = 2.0;
  double q = 2.0;

  static Exponents from_p(double p);
};

[[nodiscard]] double pairing(const State& g, const State& v, const Grid& grid);
[[nodiscard]] double h_norm(const State& v, const Grid& grid);
[[nodiscard]] double va_norm(const State& v, const Grid& grid, double p);

/// sqrt(<Bv, v>). Throws std::domain_error when <Bv, v> is negative beyond
/// round-off, which means the matrix is not positive.
[[nodiscard]] double b_norm(const State& v, const Matrix& b, const Grid& grid);

/// Forward differences (v_{i+1} - v_i) / h for i = 0..n with ghost zeros;
/// n + 1 entries.
[[nodiscard]] State forward_differences(const State& v, const Grid& grid);

/// Nodal p-Laplacian stencil -(phi(D+v_i) - phi(D+v_{i-1})) / h with
/// phi(x) = |x|^{p-2} x. Satisfies <P(v), v> = ||v||_VA^p and is the
/// h-scaled gradient of ||v||_VA^p / p.
[[nodiscard]] State p_laplacian_stencil(const State& v, const Grid& grid, double p);

/// Discrete Dirichlet Laplacian (1/h^2) tridiag(-1, 2, -1).
[[nodiscard]] Tridiagonal laplacian_tridiagonal(const Grid& grid);
[[nodiscard]] Matrix laplacian_matrix(const Grid& grid);

/// Norm whose dual is estimated by dual_norm_estimate.
struct HNorm {};
struct VANorm {
  double p = 2.0;
};
struct BNorm {
  Matrix matrix;
};
using NormSpec = std::variant<HNorm, VANorm, BNorm>;

struct DualNormOptions {
  std::size_t iters = 50;
  std::size_t random_starts = 3;
  std::uint64_t seed = 1;
};

/// Certified lower bound of sup_{v != 0} <g, v> / ||v|| by preconditioned
/// normalized ascent from several starts. Exact for HNorm (self-duality).
/// `hints` are extra deterministic starting points. Nondecreasing in iters.
[[nodiscard]] double dual_norm_estimate(const State& g, const NormSpec& norm, const Grid& grid,
                                        const DualNormOptions& options = {},
                                        std::span<const State> hints = {});

struct EmbeddingOptions {
  std::size_t iters = 200;
  std::size_t random_starts = 4;
  std::uint64_t seed = 7;
};

/// Sampled sup of ||v||_H / ||v||_VA. For p = 2 this converges to
/// 1 / sqrt(lambda_1) of the discrete Dirichlet Laplacian.
[[nodiscard]] double embedding_constant(const Grid& grid, double p, const EmbeddingOptions& options = {});

/// Tent function x -> min(x, L - x) on the interior nodes.
[[nodiscard]] State tent_function(const Grid& grid);

/// k-th (1-based) discrete Dirichlet Laplacian eigenpair in closed form:
/// eigenvalue (2 - 2 cos(k pi / (n + 1))) / h^2, eigenvector sin(k pi x / L).
[[nodiscard]] double laplacian_eigenvalue(const Grid& grid, std::size_t k);
[[nodiscard]] State laplacian_eigenvector(const Grid& grid, std::size_t k);

[[nodiscard]] bool all_finite(const State& v);

}  // namespace memincl
