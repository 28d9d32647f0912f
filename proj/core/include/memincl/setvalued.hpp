#pragma once

// Closed convex set-valued right-hand sides F(t, v) and the pointwise
// machinery that turns them into selections: evaluation, projection,
// support points, growth checking and radial truncation.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "memincl/kernel.hpp"
#include "memincl/operators.hpp"
#include "memincl/spaces.hpp"

namespace memincl {

using VectorMap = std::function<State(double t, const State& v)>;
using ScalarMap = std::function<double(double t, const State& v)>;

class InvalidFieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProjectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Evaluated sets -------------------------------------------------------------

struct BallSet {
  State center;
  double radius = 0.0;
};
struct BoxSet {
  State lower;
  State upper;
};
struct PolytopeSet {
  std::vector<State> vertices;
};
struct SingletonSet {
  State point;
};

/// Nonempty closed convex subset of the state space at a fixed (t, v).
struct SetValue {
  std::variant<BallSet, BoxSet, PolytopeSet, SingletonSet> shape;
  Grid grid;
};

bool operator==(const SetValue& a, const SetValue& b);

// Fields -------------------------------------------------------------------

struct BallField {
  VectorMap center;
  ScalarMap radius;
};
struct BoxField {
  VectorMap lower;
  VectorMap upper;
};
struct PolytopeField {
  std::vector<VectorMap> vertices;  // at most 8
};
struct SingletonField {
  VectorMap point;
};

struct SetField {
  std::variant<BallField, BoxField, PolytopeField, SingletonField> kind;
  Grid grid;
  std::optional<double> truncation_radius;

  static SetField ball(const Grid& grid, VectorMap center, ScalarMap radius);
  static SetField box(const Grid& grid, VectorMap lower, VectorMap upper);
  static SetField polytope(const Grid& grid, std::vector<VectorMap> vertices);
  static SetField singleton(const Grid& grid, VectorMap point);
};

inline constexpr std::size_t kMaxPolytopeVertices = 8;

/// Growth envelope |F(t, v)| <= a(t) + b ||v||_H^{2/q}; `a` is sampled on the
/// mesh nodes.
struct GrowthEnvelope {
  std::vector<double> a;
  double b = 1.0;
  double q = 2.0;

  static GrowthEnvelope constant(const TimeMesh& mesh, double a0, double b, double q);
  [[nodiscard]] double bound(std::size_t node, double v_norm) const;
};

struct MinimalNorm {};
struct ProjectPrevious {};
struct Extremal {
  State direction;
};
struct ConstantCenter {};
using SelectionRule = std::variant<MinimalNorm, ProjectPrevious, Extremal, ConstantCenter>;

[[nodiscard]] std::string rule_name(const SelectionRule& rule);

/// Radial retraction onto the closed H-ball of the given radius.
[[nodiscard]] State radial_retraction(const State& v, double radius, const Grid& grid);

/// Instantiates F(t, v); with a truncation radius, v is retracted first.
/// Throws InvalidFieldError on a box with lower > upper or a negative radius.
[[nodiscard]] SetValue evaluate(const SetField& field, double t, const State& v);

/// sup of ||x||_H over the set.
[[nodiscard]] double magnitude(const SetValue& set);

struct ProjectionOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 1000;
};

/// Nearest point in the H-norm. Polytopes use Wolfe's nearest-point
/// iteration; exceeding the budget throws ProjectionError.
[[nodiscard]] State project(const SetValue& set, const State& x, const ProjectionOptions& options = {});

/// argmax over the set of <x, d>. Throws std::invalid_argument for d = 0.
[[nodiscard]] State support_point(const SetValue& set, const State& d);

[[nodiscard]] double distance_to_set(const SetValue& set, const State& x);

/// Point of the set chosen by `rule`; ProjectPrevious requires `prev`.
[[nodiscard]] State select(const SetValue& set, const SelectionRule& rule, const std::optional<State>& prev);

/// Copy of the field with truncation radius M1 (the radial retraction r_M1).
[[nodiscard]] SetField truncate(const SetField& field, double radius);

struct GrowthCheckOptions {
  std::size_t samples = 8;
  std::uint64_t base_seed = 99;
  std::size_t max_nodes = 64;  // mesh nodes visited (evenly strided)
};

/// magnitude(F(t_n, v)) <= a(t_n) + b ||v||_H^{2/q} over mesh nodes and
/// sampled v with ||v||_H in 1e-2..1e2.
[[nodiscard]] AssumptionReport check_growth_F(const SetField& field, const GrowthEnvelope& env,
                                              const TimeMesh& mesh, const GrowthCheckOptions& options = {});

/// Upper bound of the Hausdorff distance between two sets of the same kind.
[[nodiscard]] double hausdorff_bound(const SetValue& a, const SetValue& b);

}  // namespace memincl
