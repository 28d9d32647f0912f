#include "memincl/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace memincl {

OperatorA::OperatorA(Grid grid, Kind kind) : grid_(grid), kind_(std::move(kind)) {
  if (const auto* pl = std::get_if<PLaplacianA>(&kind_); pl != nullptr && !(pl->p >= 2.0)) {
    throw std::invalid_argument("OperatorA: p-Laplacian requires p >= 2");
  }
  if (const auto* lin = std::get_if<LinearA>(&kind_)) {
    const auto n = static_cast<Eigen::Index>(grid_.n);
    if (lin->matrix.rows() != n || lin->matrix.cols() != n) {
      throw std::invalid_argument("OperatorA: matrix does not match grid");
    }
  }
}

OperatorA OperatorA::p_laplacian(const Grid& grid, double p) { return OperatorA(grid, PLaplacianA{p}); }

OperatorA OperatorA::linear(const Grid& grid, Matrix matrix) {
  return OperatorA(grid, LinearA{std::move(matrix)});
}

OperatorA OperatorA::custom(const Grid& grid, std::string name, std::function<State(const State&)> apply) {
  return OperatorA(grid, CustomA{std::move(name), std::move(apply)});
}

OperatorA OperatorA::laplacian(const Grid& grid) { return linear(grid, laplacian_matrix(grid)); }

OperatorA OperatorA::laplacian_plus_identity(const Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.n);
  return linear(grid, laplacian_matrix(grid) + Matrix::Identity(n, n));
}

OperatorA OperatorA::identity(const Grid& grid, double scale) {
  const auto n = static_cast<Eigen::Index>(grid.n);
  return linear(grid, scale * Matrix::Identity(n, n));
}

OperatorA OperatorA::zero(const Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.n);
  return linear(grid, Matrix::Zero(n, n));
}

OperatorA OperatorA::negated_laplacian(const Grid& grid) { return linear(grid, -laplacian_matrix(grid)); }

OperatorA OperatorA::exp_entrywise(const Grid& grid) {
  return custom(grid, "exp_entrywise", [](const State& v) { return State(v.array().exp() - 1.0); });
}

OperatorA OperatorA::sign_switch(const Grid& grid) {
  return custom(grid, "sign_switch", [](const State& v) {
    return State(v.unaryExpr([](double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }));
  });
}

State OperatorA::apply(const State& v) const {
  return std::visit(
      [&](const auto& k) -> State {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, PLaplacianA>) {
          return p_laplacian_stencil(v, grid_, k.p);
        } else if constexpr (std::is_same_v<K, LinearA>) {
          return k.matrix * v;
        } else {
          return k.apply(v);
        }
      },
      kind_);
}

std::string OperatorA::name() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, PLaplacianA>) {
          std::ostringstream os;
          os << "p_laplacian(p=" << k.p << ")";
          return os.str();
        } else if constexpr (std::is_same_v<K, LinearA>) {
          return "linear";
        } else {
          return k.name;
        }
      },
      kind_);
}

// ---------------------------------------------------------------------------

OperatorB::OperatorB(Grid grid, BKind kind, double parameter, Matrix matrix)
    : grid_(grid), kind_(kind), parameter_(parameter), matrix_(std::move(matrix)) {
  const auto n = static_cast<Eigen::Index>(grid_.n);
  if (matrix_.rows() != n || matrix_.cols() != n) {
    throw std::invalid_argument("OperatorB: matrix does not match grid");
  }
}

OperatorB OperatorB::laplacian(const Grid& grid) {
  return OperatorB(grid, BKind::Laplacian, 1.0, laplacian_matrix(grid));
}

OperatorB OperatorB::fractional_laplacian(const Grid& grid, double s) {
  if (!(s > 0.5 && s < 1.0)) {
    throw std::invalid_argument("OperatorB: fractional order must satisfy 1/2 < s < 1");
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(laplacian_matrix(grid));
  const Eigen::VectorXd powered = eig.eigenvalues().array().pow(s);
  Matrix m = eig.eigenvectors() * powered.asDiagonal() * eig.eigenvectors().transpose();
  // Symmetric by construction; remove the round-off asymmetry of the product.
  Matrix sym = 0.5 * (m + m.transpose());
  return OperatorB(grid, BKind::FractionalLaplacian, s, std::move(sym));
}

OperatorB OperatorB::identity_scaled(const Grid& grid, double scale) {
  const auto n = static_cast<Eigen::Index>(grid.n);
  return OperatorB(grid, BKind::IdentityScaled, scale, scale * Matrix::Identity(n, n));
}

OperatorB OperatorB::from_matrix(const Grid& grid, Matrix matrix) {
  return OperatorB(grid, BKind::Matrix, 0.0, std::move(matrix));
}

OperatorB OperatorB::with_asymmetry(double epsilon) const {
  Matrix m = matrix_;
  if (m.rows() >= 2) {
    m(0, 1) += epsilon;
  } else {
    m(0, 0) += epsilon;
  }
  return OperatorB(grid_, BKind::Matrix, 0.0, std::move(m));
}

std::string OperatorB::name() const {
  std::ostringstream os;
  switch (kind_) {
    case BKind::Laplacian: os << "laplacian"; break;
    case BKind::FractionalLaplacian: os << "fractional_laplacian(s=" << parameter_ << ")"; break;
    case BKind::IdentityScaled: os << "identity_scaled(" << parameter_ << ")"; break;
    case BKind::Matrix: os << "matrix"; break;
  }
  return os.str();
}

double b_norm(const State& v, const OperatorB& b) { return b_norm(v, b.matrix(), b.grid()); }

// ---------------------------------------------------------------------------

std::vector<double> sample_magnitudes(double lo_exp, double hi_exp) {
  std::vector<double> out;
  for (double e = lo_exp; e <= hi_exp + 1e-9; e += 1.0) {
    out.push_back(std::pow(10.0, e));
  }
  return out;
}

namespace {

State random_direction(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  State v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = normal(rng);
  }
  return v;
}

struct Direction {
  State d;
  std::uint64_t seed;  // 0 for deterministic probes
  std::size_t index;
};

// Deterministic spectral probes plus seeded random directions.
std::vector<Direction> probe_directions(const OperatorA& a, double p, const CheckOptions& options) {
  const Grid& grid = a.grid();
  std::vector<Direction> dirs;
  std::size_t index = 0;
  const std::size_t low = std::min<std::size_t>(grid.n, 4);
  for (std::size_t k = 1; k <= low; ++k) {
    dirs.push_back({laplacian_eigenvector(grid, k), 0, index++});
  }
  for (std::size_t k = std::max(low + 1, grid.n > 1 ? grid.n - 1 : grid.n); k <= grid.n; ++k) {
    dirs.push_back({laplacian_eigenvector(grid, k), 0, index++});
  }
  dirs.push_back({tent_function(grid), 0, index++});

  if (const auto* lin = std::get_if<LinearA>(&a.kind()); lin != nullptr && p == 2.0) {
    // Generalized eigenvectors of (sym(M), L) realize the exact extreme
    // Rayleigh quotients for linear operators.
    const Matrix sym = 0.5 * (lin->matrix + lin->matrix.transpose());
    const Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(sym, laplacian_matrix(grid));
    for (Eigen::Index k = 0; k < ges.eigenvectors().cols(); ++k) {
      dirs.push_back({ges.eigenvectors().col(k), 0, index++});
    }
  }

  for (std::size_t s = 0; s < options.seeds; ++s) {
    std::mt19937_64 rng(options.base_seed + s);
    dirs.push_back({random_direction(rng, grid.n), options.base_seed + s, index++});
  }
  return dirs;
}

State scaled_to_va(const State& d, const Grid& grid, double p, double magnitude) {
  return (magnitude / va_norm(d, grid, p)) * d;
}

}  // namespace

AssumptionReport check_monotone(const OperatorA& a, const CheckOptions& options) {
  const Grid& grid = a.grid();
  AssumptionReport report;
  report.property = "A monotone";
  double min_value = std::numeric_limits<double>::infinity();

  for (std::size_t s = 0; s < options.seeds; ++s) {
    const std::uint64_t seed = options.base_seed + s;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> log_mag(-2.0, 2.0);
    for (std::size_t sample = 0; sample < 3; ++sample) {
      State u = std::pow(10.0, log_mag(rng)) * random_direction(rng, grid.n);
      State v;
      if (sample == 1) {
        // Nearby pair probes the local behaviour.
        v = u + 1e-3 * h_norm(u, grid) * random_direction(rng, grid.n);
      } else {
        v = std::pow(10.0, log_mag(rng)) * random_direction(rng, grid.n);
      }
      const State da = a.apply(u) - a.apply(v);
      const State dv = u - v;
      const double value = pairing(da, dv, grid);
      min_value = std::min(min_value, value);
      const double tol = 1e-10 * std::max(1.0, h_norm(da, grid) * h_norm(dv, grid));
      if (!(value >= -tol) && report.pass) {
        report.pass = false;
        std::ostringstream os;
        os << "<Au - Av, u - v> = " << value << " < 0";
        report.witness = Witness{seed, sample, os.str(), {u, v}, {value}};
      }
    }
  }
  report.constants["min_pairing"] = min_value;
  return report;
}

AssumptionReport check_growth_A(const OperatorA& a, double p, const CheckOptions& options) {
  const Grid& grid = a.grid();
  AssumptionReport report;
  report.property = "A growth of order p-1";

  DualNormOptions dual;
  dual.iters = 25;
  dual.random_starts = 1;

  double beta = 0.0;
  const auto fit_range = sample_magnitudes(-2.0, 2.0);
  const auto extended = sample_magnitudes(3.0, 4.0);

  auto ratio_at = [&](const State& v, double magnitude) {
    const State av = a.apply(v);
    if (!av.allFinite()) {
      return std::numeric_limits<double>::infinity();
    }
    const State hint[] = {v};
    const double d = dual_norm_estimate(av, VANorm{p}, grid, dual, hint);
    return d / (1.0 + std::pow(magnitude, p - 1.0));
  };

  const auto dirs = probe_directions(a, p, options);
  for (const auto& dir : dirs) {
    for (double m : fit_range) {
      const State v = scaled_to_va(dir.d, grid, p, m);
      const double r = ratio_at(v, m);
      if (!std::isfinite(r)) {
        if (report.pass) {
          report.pass = false;
          report.witness = Witness{dir.seed, dir.index, "non-finite Av inside the fit range", {v}, {m}};
        }
        continue;
      }
      beta = std::max(beta, r);
    }
  }
  // Scaling test: a finite beta_A must still hold an order of magnitude beyond the fit range.
  for (const auto& dir : dirs) {
    for (double m : extended) {
      const State v = scaled_to_va(dir.d, grid, p, m);
      const double r = ratio_at(v, m);
      const bool blown = !std::isfinite(r) || r > 2.0 * beta + 1e-12;
      if (blown && report.pass) {
        report.pass = false;
        std::ostringstream os;
        os << "growth ratio " << r << " at ||v||_VA = " << m << " exceeds fitted beta_A = " << beta;
        report.witness = Witness{dir.seed, dir.index, os.str(), {v}, {m, r}};
      }
    }
  }
  report.constants["beta_A"] = beta;
  return report;
}

AssumptionReport check_coercive_A(const OperatorA& a, double p, const CheckOptions& options) {
  const Grid& grid = a.grid();
  AssumptionReport report;
  report.property = "A p-coercive";

  const auto magnitudes = sample_magnitudes(-2.0, 2.0);
  const double top = magnitudes.back();
  const auto dirs = probe_directions(a, p, options);

  struct Sample {
    double pairing;
    double norm_p;
    const Direction* dir;
    double magnitude;
  };
  std::vector<Sample> samples;
  double mu = std::numeric_limits<double>::infinity();
  const Sample* argmin = nullptr;
  samples.reserve(dirs.size() * magnitudes.size());
  for (const auto& dir : dirs) {
    for (double m : magnitudes) {
      const State v = scaled_to_va(dir.d, grid, p, m);
      samples.push_back({pairing(a.apply(v), v, grid), std::pow(m, p), &dir, m});
    }
  }
  for (const auto& s : samples) {
    if (s.magnitude == top) {
      const double r = s.pairing / s.norm_p;
      if (r < mu) {
        mu = r;
        argmin = &s;
      }
    }
  }

  double offset = 0.0;
  double max_norm = 1.0;
  for (const auto& s : samples) {
    offset = std::max(offset, mu * s.norm_p - s.pairing);
    max_norm = std::max(max_norm, s.norm_p);
  }
  const double c_a = offset <= 1e-10 * max_norm ? 0.0 : offset;

  if (!(mu > 1e-12) || !std::isfinite(mu)) {
    report.pass = false;
    std::ostringstream os;
    os << "<Av, v> / ||v||_VA^p = " << mu << " at ||v||_VA = " << top << "; no positive mu_A";
    if (argmin != nullptr) {
      report.witness = Witness{argmin->dir->seed, argmin->dir->index, os.str(),
                               {scaled_to_va(argmin->dir->d, grid, p, top)}, {mu}};
    }
  }
  report.constants["mu_A"] = mu;
  report.constants["c_A"] = c_a;
  return report;
}

AssumptionReport check_B(const OperatorB& b) {
  AssumptionReport report;
  report.property = "B symmetric and strongly positive";
  const Matrix& m = b.matrix();

  double worst = 0.0;
  Eigen::Index wi = 0;
  Eigen::Index wj = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      const double diff = std::abs(m(i, j) - m(j, i));
      if (diff > worst) {
        worst = diff;
        wi = i;
        wj = j;
      }
    }
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  report.constants["asymmetry"] = worst;
  if (worst > 1e-12 * scale) {
    report.pass = false;
    std::ostringstream os;
    os << "B(" << wi << "," << wj << ") = " << m(wi, wj) << " but B(" << wj << "," << wi << ") = " << m(wj, wi);
    report.witness = Witness{0, 0, os.str(), {},
                             {static_cast<double>(wi), static_cast<double>(wj), m(wi, wj), m(wj, wi)}};
  }

  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()));
  const double mu_b = eig.eigenvalues().minCoeff();
  const double beta_b = eig.eigenvalues().cwiseAbs().maxCoeff();
  report.constants["mu_B"] = mu_b;
  report.constants["beta_B"] = beta_b;
  if (!(mu_b > 0.0)) {
    std::ostringstream os;
    os << "smallest eigenvalue " << mu_b << " <= 0";
    if (report.pass) {
      report.witness = Witness{0, 0, os.str(), {eig.eigenvectors().col(0)}, {mu_b}};
    }
    report.pass = false;
  }
  report.detail = "constants in the H frame: <Bv,v> >= mu_B ||v||_H^2, ||Bv||_H <= beta_B ||v||_H";
  return report;
}

double hemicontinuity_probe(const OperatorA& a, const State& u, const State& v, const State& w,
                            std::size_t m) {
  if (m < 2) {
    throw std::invalid_argument("hemicontinuity_probe: need m >= 2");
  }
  const Grid& grid = a.grid();
  double prev = pairing(a.apply(u), w, grid);
  double jump = 0.0;
  for (std::size_t k = 1; k < m; ++k) {
    const double theta = static_cast<double>(k) / static_cast<double>(m - 1);
    const double cur = pairing(a.apply(u + theta * v), w, grid);
    jump = std::max(jump, std::abs(cur - prev));
    prev = cur;
  }
  return jump;
}

AssumptionReport check_hemicontinuity(const OperatorA& a, const CheckOptions& options) {
  const Grid& grid = a.grid();
  AssumptionReport report;
  report.property = "A hemicontinuous";
  const std::size_t probes = std::max<std::size_t>(1, std::min<std::size_t>(options.seeds, 4));
  double worst_ratio = 0.0;
  for (std::size_t s = 0; s < probes; ++s) {
    const std::uint64_t seed = options.base_seed + s;
    std::mt19937_64 rng(seed);
    const State u = random_direction(rng, grid.n);
    // v = -2u sends every component of u + theta v through zero at theta = 1/2,
    // which is never a sample point for the odd denominators m - 1 used here.
    const State v = -2.0 * u;
    const State w = random_direction(rng, grid.n);
    const double j10 = hemicontinuity_probe(a, u, v, w, 10);
    const double j1000 = hemicontinuity_probe(a, u, v, w, 1000);
    const double floor = 1e-13 * (1.0 + h_norm(a.apply(u), grid) * h_norm(w, grid));
    if (j10 <= floor) {
      continue;
    }
    const double ratio = j1000 / j10;
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio > 0.05 && report.pass) {
      report.pass = false;
      std::ostringstream os;
      os << "max jump " << j1000 << " at m=1000 vs " << j10 << " at m=10 does not decay";
      report.witness = Witness{seed, 0, os.str(), {u, v, w}, {j10, j1000}};
    }
  }
  report.constants["jump_ratio"] = worst_ratio;
  return report;
}

}  // namespace memincl
