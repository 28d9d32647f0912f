#pragma once

// Scenario files: JSON documents describing one problem instance plus solver
// settings. Keys carry their units where it matters (lambda_per_time).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "memincl/diagnostics.hpp"
#include "memincl/solver.hpp"

namespace memincl::app {

using nlohmann::json;

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { Marching, FixedPoint };

struct SolverSettings {
  Method method = Method::Marching;
  SelectionRule rule = MinimalNorm{};
  double tol_newton = 1e-12;
  std::size_t max_newton_iter = 200;
  double tol_fp = 1e-10;
  std::size_t k_max = 100;
  double tol_set = 1e-9;
  double tol_equation = 1e-8;
};

/// A parsed scenario. `problem` is fully built; `document` is the canonical
/// JSON (defaults filled in, overrides applied) that the hash is taken over.
struct Scenario {
  std::string name;
  std::uint64_t seed = 1;
  ProblemData problem;
  GrowthEnvelope envelope;
  SolverSettings solver;
  std::optional<std::string> reference;
  json document;
};

/// Reads and parses a file. Errors carry "line L, column C" for syntax
/// problems and the dotted key path for semantic ones.
[[nodiscard]] json load_document(const std::string& path);

/// Applies "a.b.c=value" overrides; the value is parsed as JSON and falls
/// back to a plain string.
void apply_override(json& document, const std::string& assignment);

[[nodiscard]] Scenario build_scenario(const json& document);

/// FNV-1a 64 of the compact dump of the canonical document.
[[nodiscard]] std::uint64_t scenario_hash(const json& document);

/// Evaluates a profile spec ({"profile": "sine", "amplitude": 1, "mode": 1}) on the grid.
[[nodiscard]] State build_profile(const json& spec, const Grid& grid, const std::string& where);

/// Exact solution of the bundled scalar reference, e^{-t} cos t.
[[nodiscard]] State scalar_damped_cosine(double t);

}  // namespace memincl::app
