#pragma once

// Principal operator A (monotone, hemicontinuous, growth of order p-1,
// p-coercive) and memory operator B (linear, bounded, strongly positive,
// symmetric) on the discrete grid, plus sampling-based falsifiers for those
// properties. A checker can only refute a property; a pass means no sample
// violated it, and the fitted constants are what downstream estimates use.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "memincl/spaces.hpp"

namespace memincl {

struct PLaplacianA {
  double p = 2.0;
};
struct LinearA {
  Matrix matrix;
};
struct CustomA {
  std::string name;
  std::function<State(const State&)> apply;
};

class OperatorA {
 public:
  using Kind = std::variant<PLaplacianA, LinearA, CustomA>;

  OperatorA(Grid grid, Kind kind);

  static OperatorA p_laplacian(const Grid& grid, double p);
  static OperatorA linear(const Grid& grid, Matrix matrix);
  static OperatorA custom(const Grid& grid, std::string name, std::function<State(const State&)> apply);

  // Built-in instances used by the checker suite.
  static OperatorA laplacian(const Grid& grid);
  static OperatorA laplacian_plus_identity(const Grid& grid);
  static OperatorA identity(const Grid& grid, double scale = 1.0);
  static OperatorA zero(const Grid& grid);
  static OperatorA negated_laplacian(const Grid& grid);
  /// v -> exp(v) - 1 entrywise: monotone but with exponential growth.
  static OperatorA exp_entrywise(const Grid& grid);
  /// v -> sign(v) entrywise: monotone but not hemicontinuous.
  static OperatorA sign_switch(const Grid& grid);

  [[nodiscard]] State apply(const State& v) const;
  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] const Kind& kind() const { return kind_; }
  [[nodiscard]] std::string name() const;

 private:
  Grid grid_;
  Kind kind_;
};

enum class BKind { Laplacian, FractionalLaplacian, IdentityScaled, Matrix };

class OperatorB {
 public:
  static OperatorB laplacian(const Grid& grid);
  /// Spectral power V diag(lambda_k^s) V^T of the discrete Dirichlet Laplacian, 1/2 < s < 1.
  static OperatorB fractional_laplacian(const Grid& grid, double s);
  static OperatorB identity_scaled(const Grid& grid, double scale);
  static OperatorB from_matrix(const Grid& grid, Matrix matrix);

  /// Copy with B(0,1) perturbed by `epsilon`; used to inject an asymmetry.
  [[nodiscard]] OperatorB with_asymmetry(double epsilon) const;

  [[nodiscard]] State apply(const State& v) const { return matrix_ * v; }
  [[nodiscard]] const Matrix& matrix() const { return matrix_; }
  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] BKind kind() const { return kind_; }
  [[nodiscard]] double parameter() const { return parameter_; }
  [[nodiscard]] std::string name() const;

 private:
  OperatorB(Grid grid, BKind kind, double parameter, Matrix matrix);

  Grid grid_;
  BKind kind_;
  double parameter_;
  Matrix matrix_;
};

/// sqrt(<Bv, v>).
[[nodiscard]] double b_norm(const State& v, const OperatorB& b);

struct Witness {
  std::uint64_t seed = 0;
  std::size_t sample = 0;
  std::string description;
  std::vector<State> points;
  std::vector<double> values;
};

struct AssumptionReport {
  std::string property;
  bool pass = true;
  std::optional<Witness> witness;
  std::map<std::string, double> constants;
  std::string detail;
};

struct CheckOptions {
  std::size_t seeds = 16;
  std::uint64_t base_seed = 2024;
};

/// <Au - Av, u - v> >= -1e-10 (relative) on seeded random pairs.
[[nodiscard]] AssumptionReport check_monotone(const OperatorA& a, const CheckOptions& options = {});

/// Fits beta_A with ||Av||_{VA*} <= beta_A (1 + ||v||_VA^{p-1}) over magnitudes
/// 1e-2..1e2; fails when the ratio keeps growing at 1e3..1e4.
[[nodiscard]] AssumptionReport check_growth_A(const OperatorA& a, double p, const CheckOptions& options = {});

/// Fits (mu_A, c_A) with <Av, v> >= mu_A ||v||_VA^p - c_A. mu_A is the
/// smallest ratio at the largest sampled magnitude, c_A the smallest offset
/// making every sample consistent (snapped to 0 at round-off level).
[[nodiscard]] AssumptionReport check_coercive_A(const OperatorA& a, double p, const CheckOptions& options = {});

/// Symmetry (max |B_ij - B_ji| <= 1e-12 relative to max |B_ij|), mu_B and
/// beta_B as extreme eigenvalues. Constants are in the H frame:
/// <Bv, v> >= mu_B ||v||_H^2 and ||Bv||_H <= beta_B ||v||_H.
[[nodiscard]] AssumptionReport check_B(const OperatorB& b);

/// Largest adjacent difference of theta -> <A(u + theta v), w> on m uniform points of [0, 1].
[[nodiscard]] double hemicontinuity_probe(const OperatorA& a, const State& u, const State& v, const State& w,
                                          std::size_t m);

/// Runs hemicontinuity_probe at m = 10, 100, 1000 on seeded (u, v, w) and
/// flags the operator when the max jump does not decay (ratio m=1000 / m=10
/// above 0.05).
[[nodiscard]] AssumptionReport check_hemicontinuity(const OperatorA& a, const CheckOptions& options = {});

/// Log-spaced magnitudes used by the growth and coercivity samplers.
[[nodiscard]] std::vector<double> sample_magnitudes(double lo_exp, double hi_exp);

}  // namespace memincl
