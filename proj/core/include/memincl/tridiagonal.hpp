#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace memincl {

/// Tridiagonal matrix in band storage. `lower[i]` couples row i+1 to column i,
/// `upper[i]` couples row i to column i+1.
struct Tridiagonal {
  Eigen::VectorXd lower;
  Eigen::VectorXd diag;
  Eigen::VectorXd upper;

  explicit Tridiagonal(std::size_t n = 0)
      : lower(Eigen::VectorXd::Zero(n > 0 ? static_cast<Eigen::Index>(n - 1) : 0)),
        diag(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))),
        upper(Eigen::VectorXd::Zero(n > 0 ? static_cast<Eigen::Index>(n - 1) : 0)) {}

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(diag.size()); }

  [[nodiscard]] Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  [[nodiscard]] Eigen::MatrixXd dense() const;

  // Thomas algorithm. No pivoting: callers pass diagonally dominant or SPD systems.
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
};

}  // namespace memincl
