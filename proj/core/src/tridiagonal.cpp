#include "memincl/tridiagonal.hpp"

#include <stdexcept>

namespace memincl {

Eigen::VectorXd Tridiagonal::multiply(const Eigen::VectorXd& x) const {
  const Eigen::Index n = diag.size();
  Eigen::VectorXd y = diag.cwiseProduct(x);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    y[i] += upper[i] * x[i + 1];
    y[i + 1] += lower[i] * x[i];
  }
  return y;
}

Eigen::MatrixXd Tridiagonal::dense() const {
  const Eigen::Index n = diag.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = diag[i];
    if (i + 1 < n) {
      m(i, i + 1) = upper[i];
      m(i + 1, i) = lower[i];
    }
  }
  return m;
}

Eigen::VectorXd Tridiagonal::solve(const Eigen::VectorXd& rhs) const {
  const Eigen::Index n = diag.size();
  if (rhs.size() != n) {
    throw std::invalid_argument("Tridiagonal::solve: size mismatch");
  }
  Eigen::VectorXd c(n);
  Eigen::VectorXd d(n);
  double denom = diag[0];
  if (denom == 0.0) {
    throw std::runtime_error("Tridiagonal::solve: zero pivot");
  }
  c[0] = n > 1 ? upper[0] / denom : 0.0;
  d[0] = rhs[0] / denom;
  for (Eigen::Index i = 1; i < n; ++i) {
    denom = diag[i] - lower[i - 1] * c[i - 1];
    if (denom == 0.0) {
      throw std::runtime_error("Tridiagonal::solve: zero pivot");
    }
    c[i] = i + 1 < n ? upper[i] / denom : 0.0;
    d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    d[i] -= c[i] * d[i + 1];
  }
  return d;
}

}  // namespace memincl
