#include "memincl/setvalued.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace memincl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool same_bits(const State& a, const State& b) {
  return a.size() == b.size() && std::equal(a.data(), a.data() + a.size(), b.data());
}

void require_finite(const State& v, const char* what) {
  if (!v.allFinite()) {
    throw InvalidFieldError(std::string("evaluate: non-finite ") + what);
  }
}

}  // namespace

bool operator==(const SetValue& a, const SetValue& b) {
  if (a.grid.n != b.grid.n || a.grid.h != b.grid.h || a.shape.index() != b.shape.index()) {
    return false;
  }
  return std::visit(
      overloaded{
          [&](const BallSet& x) {
            const auto& y = std::get<BallSet>(b.shape);
            return x.radius == y.radius && same_bits(x.center, y.center);
          },
          [&](const BoxSet& x) {
            const auto& y = std::get<BoxSet>(b.shape);
            return same_bits(x.lower, y.lower) && same_bits(x.upper, y.upper);
          },
          [&](const PolytopeSet& x) {
            const auto& y = std::get<PolytopeSet>(b.shape);
            if (x.vertices.size() != y.vertices.size()) {
              return false;
            }
            for (std::size_t i = 0; i < x.vertices.size(); ++i) {
              if (!same_bits(x.vertices[i], y.vertices[i])) {
                return false;
              }
            }
            return true;
          },
          [&](const SingletonSet& x) { return same_bits(x.point, std::get<SingletonSet>(b.shape).point); },
      },
      a.shape);
}

SetField SetField::ball(const Grid& grid, VectorMap center, ScalarMap radius) {
  return SetField{BallField{std::move(center), std::move(radius)}, grid, std::nullopt};
}

SetField SetField::box(const Grid& grid, VectorMap lower, VectorMap upper) {
  return SetField{BoxField{std::move(lower), std::move(upper)}, grid, std::nullopt};
}

SetField SetField::polytope(const Grid& grid, std::vector<VectorMap> vertices) {
  if (vertices.empty() || vertices.size() > kMaxPolytopeVertices) {
    throw InvalidFieldError("polytope field needs 1..8 vertex maps");
  }
  return SetField{PolytopeField{std::move(vertices)}, grid, std::nullopt};
}

SetField SetField::singleton(const Grid& grid, VectorMap point) {
  return SetField{SingletonField{std::move(point)}, grid, std::nullopt};
}

GrowthEnvelope GrowthEnvelope::constant(const TimeMesh& mesh, double a0, double b, double q) {
  return GrowthEnvelope{std::vector<double>(mesh.nodes(), a0), b, q};
}

double GrowthEnvelope::bound(std::size_t node, double v_norm) const {
  return a.at(node) + b * std::pow(v_norm, 2.0 / q);
}

std::string rule_name(const SelectionRule& rule) {
  return std::visit(overloaded{
                        [](const MinimalNorm&) { return std::string("minimal_norm"); },
                        [](const ProjectPrevious&) { return std::string("project_previous"); },
                        [](const Extremal&) { return std::string("extremal"); },
                        [](const ConstantCenter&) { return std::string("constant_center"); },
                    },
                    rule);
}

State radial_retraction(const State& v, double radius, const Grid& grid) {
  const double norm = h_norm(v, grid);
  if (norm <= radius) {
    return v;
  }
  return (radius / norm) * v;
}

SetValue evaluate(const SetField& field, double t, const State& v_in) {
  const State v = field.truncation_radius ? radial_retraction(v_in, *field.truncation_radius, field.grid) : v_in;
  SetValue out{SingletonSet{}, field.grid};
  std::visit(overloaded{
                 [&](const BallField& f) {
                   BallSet s{f.center(t, v), f.radius(t, v)};
                   require_finite(s.center, "ball center");
                   if (!(s.radius >= 0.0) || !std::isfinite(s.radius)) {
                     throw InvalidFieldError("evaluate: ball radius must be finite and >= 0");
                   }
                   out.shape = std::move(s);
                 },
                 [&](const BoxField& f) {
                   BoxSet s{f.lower(t, v), f.upper(t, v)};
                   require_finite(s.lower, "box lower bound");
                   require_finite(s.upper, "box upper bound");
                   for (Eigen::Index i = 0; i < s.lower.size(); ++i) {
                     if (s.lower[i] > s.upper[i]) {
                       std::ostringstream os;
                       os << "evaluate: box lower > upper in component " << i;
                       throw InvalidFieldError(os.str());
                     }
                   }
                   out.shape = std::move(s);
                 },
                 [&](const PolytopeField& f) {
                   PolytopeSet s;
                   for (const auto& vertex : f.vertices) {
                     s.vertices.push_back(vertex(t, v));
                     require_finite(s.vertices.back(), "polytope vertex");
                   }
                   out.shape = std::move(s);
                 },
                 [&](const SingletonField& f) {
                   SingletonSet s{f.point(t, v)};
                   require_finite(s.point, "singleton point");
                   out.shape = std::move(s);
                 },
             },
             field.kind);
  return out;
}

double magnitude(const SetValue& set) {
  const Grid& g = set.grid;
  return std::visit(overloaded{
                        [&](const BallSet& s) { return h_norm(s.center, g) + s.radius; },
                        [&](const BoxSet& s) {
                          const State corner = s.lower.cwiseAbs().cwiseMax(s.upper.cwiseAbs());
                          return h_norm(corner, g);
                        },
                        [&](const PolytopeSet& s) {
                          double best = 0.0;
                          for (const auto& v : s.vertices) {
                            best = std::max(best, h_norm(v, g));
                          }
                          return best;
                        },
                        [&](const SingletonSet& s) { return h_norm(s.point, g); },
                    },
                    set.shape);
}

namespace {

// Wolfe's nearest-point method for the convex hull of the columns of `p`
// (the target is the origin). Returns barycentric weights.
Eigen::VectorXd wolfe_nearest_point(const Matrix& p, const ProjectionOptions& options) {
  const Eigen::Index m = p.cols();
  const Eigen::VectorXd sq = p.colwise().squaredNorm().transpose();
  const double scale2 = std::max(sq.maxCoeff(), std::numeric_limits<double>::min());
  const double gap_tol =
      std::max(options.tolerance * options.tolerance, 64.0 * std::numeric_limits<double>::epsilon() * scale2);

  Eigen::Index start = 0;
  sq.minCoeff(&start);
  std::vector<Eigen::Index> active{start};
  std::vector<double> weights{1.0};

  auto current_point = [&]() {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(p.rows());
    for (std::size_t k = 0; k < active.size(); ++k) {
      y += weights[k] * p.col(active[k]);
    }
    return y;
  };

  std::size_t iterations = 0;
  while (true) {
    const Eigen::VectorXd y = current_point();
    const Eigen::VectorXd dots = p.transpose() * y;
    Eigen::Index j = 0;
    dots.minCoeff(&j);
    const double gap = y.squaredNorm() - dots[j];
    if (gap <= gap_tol || std::find(active.begin(), active.end(), j) != active.end()) {
      break;
    }
    active.push_back(j);
    weights.push_back(0.0);

    while (true) {
      if (++iterations > options.max_iterations) {
        throw ProjectionError("project: nearest-point iteration budget exceeded");
      }
      const auto k = static_cast<Eigen::Index>(active.size());
      Matrix kkt = Matrix::Zero(k + 1, k + 1);
      for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) {
          kkt(a, b) = p.col(active[a]).dot(p.col(active[b]));
        }
        kkt(a, k) = 1.0;
        kkt(k, a) = 1.0;
      }
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
      rhs[k] = 1.0;
      const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
      const Eigen::VectorXd alpha = sol.head(k);

      if ((alpha.array() > 1e-14).all()) {
        for (Eigen::Index a = 0; a < k; ++a) {
          weights[a] = alpha[a];
        }
        break;
      }
      double theta = 1.0;
      for (Eigen::Index a = 0; a < k; ++a) {
        if (alpha[a] <= 1e-14) {
          const double denom = weights[a] - alpha[a];
          if (denom > 0.0) {
            theta = std::min(theta, weights[a] / denom);
          }
        }
      }
      for (Eigen::Index a = 0; a < k; ++a) {
        weights[a] += theta * (alpha[a] - weights[a]);
      }
      std::vector<Eigen::Index> keep_idx;
      std::vector<double> keep_w;
      // Drop the blocking vertices (weights driven to zero).
      for (Eigen::Index a = 0; a < k; ++a) {
        if (weights[a] > 1e-14) {
          keep_idx.push_back(active[a]);
          keep_w.push_back(weights[a]);
        }
      }
      if (keep_idx.empty()) {
        throw ProjectionError("project: degenerate nearest-point corral");
      }
      active = std::move(keep_idx);
      weights = std::move(keep_w);
      double total = 0.0;
      for (double w : weights) {
        total += w;
      }
      for (double& w : weights) {
        w /= total;
      }
    }
  }

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  for (std::size_t k = 0; k < active.size(); ++k) {
    lambda[active[k]] = weights[k];
  }
  return lambda;
}

}  // namespace

State project(const SetValue& set, const State& x, const ProjectionOptions& options) {
  const Grid& g = set.grid;
  return std::visit(overloaded{
                        [&](const BallSet& s) -> State {
                          const State diff = x - s.center;
                          const double dist = h_norm(diff, g);
                          if (dist <= s.radius) {
                            return x;
                          }
                          return s.center + (s.radius / dist) * diff;
                        },
                        [&](const BoxSet& s) -> State { return x.cwiseMax(s.lower).cwiseMin(s.upper); },
                        [&](const PolytopeSet& s) -> State {
                          Matrix shifted(x.size(), static_cast<Eigen::Index>(s.vertices.size()));
                          for (std::size_t k = 0; k < s.vertices.size(); ++k) {
                            shifted.col(static_cast<Eigen::Index>(k)) = s.vertices[k] - x;
                          }
                          const Eigen::VectorXd lambda = wolfe_nearest_point(shifted, options);
                          State out = State::Zero(x.size());
                          for (std::size_t k = 0; k < s.vertices.size(); ++k) {
                            out += lambda[static_cast<Eigen::Index>(k)] * s.vertices[k];
                          }
                          return out;
                        },
                        [&](const SingletonSet& s) -> State { return s.point; },
                    },
                    set.shape);
}

State support_point(const SetValue& set, const State& d) {
  if (d.isZero(0.0)) {
    throw std::invalid_argument("support_point: direction must be nonzero");
  }
  const Grid& g = set.grid;
  return std::visit(overloaded{
                        [&](const BallSet& s) -> State { return s.center + (s.radius / h_norm(d, g)) * d; },
                        [&](const BoxSet& s) -> State {
                          State out(d.size());
                          for (Eigen::Index i = 0; i < d.size(); ++i) {
                            out[i] = d[i] > 0.0 ? s.upper[i] : (d[i] < 0.0 ? s.lower[i] : 0.5 * (s.lower[i] + s.upper[i]));
                          }
                          return out;
                        },
                        [&](const PolytopeSet& s) -> State {
                          std::size_t best = 0;
                          for (std::size_t k = 1; k < s.vertices.size(); ++k) {
                            if (s.vertices[k].dot(d) > s.vertices[best].dot(d)) {
                              best = k;
                            }
                          }
                          return s.vertices[best];
                        },
                        [&](const SingletonSet& s) -> State { return s.point; },
                    },
                    set.shape);
}

double distance_to_set(const SetValue& set, const State& x) { return h_norm(x - project(set, x), set.grid); }

State select(const SetValue& set, const SelectionRule& rule, const std::optional<State>& prev) {
  const auto n = static_cast<Eigen::Index>(set.grid.n);
  return std::visit(overloaded{
                        [&](const MinimalNorm&) { return project(set, State::Zero(n)); },
                        [&](const ProjectPrevious&) {
                          if (!prev) {
                            throw std::invalid_argument("select: ProjectPrevious needs a previous selection");
                          }
                          return project(set, *prev);
                        },
                        [&](const Extremal& e) { return support_point(set, e.direction); },
                        [&](const ConstantCenter&) {
                          return std::visit(overloaded{
                                                [](const BallSet& s) -> State { return s.center; },
                                                [](const BoxSet& s) -> State { return 0.5 * (s.lower + s.upper); },
                                                [&](const PolytopeSet& s) -> State {
                                                  State c = State::Zero(n);
                                                  for (const auto& v : s.vertices) {
                                                    c += v;
                                                  }
                                                  return c / static_cast<double>(s.vertices.size());
                                                },
                                                [](const SingletonSet& s) -> State { return s.point; },
                                            },
                                            set.shape);
                        },
                    },
                    rule);
}

SetField truncate(const SetField& field, double radius) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("truncate: radius must be positive");
  }
  SetField out = field;
  out.truncation_radius = radius;
  return out;
}

AssumptionReport check_growth_F(const SetField& field, const GrowthEnvelope& env, const TimeMesh& mesh,
                                const GrowthCheckOptions& options) {
  AssumptionReport report;
  report.property = "F growth envelope";
  if (env.a.size() < mesh.nodes()) {
    throw std::invalid_argument("check_growth_F: envelope not sampled on every mesh node");
  }
  const Grid& grid = field.grid;
  const auto magnitudes = sample_magnitudes(-2.0, 2.0);
  const std::size_t stride = std::max<std::size_t>(1, mesh.nodes() / std::max<std::size_t>(options.max_nodes, 1));

  std::vector<State> directions;
  for (std::size_t s = 0; s < options.samples; ++s) {
    std::mt19937_64 rng(options.base_seed + s);
    std::normal_distribution<double> normal(0.0, 1.0);
    State d(static_cast<Eigen::Index>(grid.n));
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      d[i] = normal(rng);
    }
    directions.push_back(d / h_norm(d, grid));
  }

  double worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < mesh.nodes(); node += stride) {
    const double t = mesh.t(node);
    for (std::size_t s = 0; s < directions.size(); ++s) {
      for (double m : magnitudes) {
        const State v = m * directions[s];
        const double mag = magnitude(evaluate(field, t, v));
        const double bound = env.bound(node, m);
        const double excess = mag - bound;
        worst_excess = std::max(worst_excess, excess);
        if (excess > 1e-12 * std::max(1.0, bound) && report.pass) {
          report.pass = false;
          std::ostringstream os;
          os << "|F(t, v)| = " << mag << " > a(t) + b ||v||^(2/q) = " << bound << " at t = " << t
             << ", ||v||_H = " << m;
          report.witness = Witness{options.base_seed + s, node, os.str(), {v}, {t, m, mag, bound}};
        }
      }
    }
  }
  report.constants["worst_excess"] = worst_excess;
  report.constants["b"] = env.b;
  return report;
}

double hausdorff_bound(const SetValue& a, const SetValue& b) {
  if (a.shape.index() != b.shape.index()) {
    throw std::invalid_argument("hausdorff_bound: sets of different kinds");
  }
  const Grid& g = a.grid;
  return std::visit(
      overloaded{
          [&](const BallSet& x) {
            const auto& y = std::get<BallSet>(b.shape);
            return h_norm(x.center - y.center, g) + std::abs(x.radius - y.radius);
          },
          [&](const BoxSet& x) {
            const auto& y = std::get<BoxSet>(b.shape);
            return h_norm((x.lower - y.lower).cwiseAbs().cwiseMax((x.upper - y.upper).cwiseAbs()), g);
          },
          [&](const PolytopeSet& x) {
            const auto& y = std::get<PolytopeSet>(b.shape);
            if (x.vertices.size() != y.vertices.size()) {
              throw std::invalid_argument("hausdorff_bound: vertex counts differ");
            }
            double worst = 0.0;
            for (std::size_t k = 0; k < x.vertices.size(); ++k) {
              worst = std::max(worst, h_norm(x.vertices[k] - y.vertices[k], g));
            }
            return worst;
          },
          [&](const SingletonSet& x) { return h_norm(x.point - std::get<SingletonSet>(b.shape).point, g); },
      },
      a.shape);
}

}  // namespace memincl
