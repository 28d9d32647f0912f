#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace memincl::app {

namespace {

const json& defaults() {
  static const json d = json::parse(R"({
    "name": "unnamed",
    "seed": 1,
    "grid": {"nodes": 16, "length": 1.0},
    "time": {"final_time": 1.0, "steps": 100},
    "memory": {"lambda_per_time": 1.0},
    "exponent_p": 2.0,
    "operator_A": {"kind": "p_laplacian", "scale": 1.0},
    "operator_B": {"kind": "laplacian", "s": 0.75, "scale": 1.0, "asymmetry": 0.0},
    "initial": {
      "v0": {"profile": "sine", "amplitude": 1.0, "mode": 1},
      "u0": {"profile": "zero", "amplitude": 0.0, "mode": 1}
    },
    "field": {
      "kind": "singleton",
      "base": {"gain": 0.0, "amplitude": 0.0, "omega": 0.0,
               "profile": {"profile": "sine", "amplitude": 1.0, "mode": 1}},
      "radius": 0.0,
      "half_width": 0.0,
      "vertices": []
    },
    "envelope": {"a": 1.0, "b": 1.0},
    "solver": {
      "method": "marching",
      "rule": "minimal_norm",
      "direction": {"profile": "sine", "amplitude": 1.0, "mode": 1},
      "tol_newton": 1e-12,
      "max_newton_iter": 200,
      "tol_fp": 1e-10,
      "k_max": 100,
      "tol_set": 1e-9,
      "tol_equation": 1e-8
    },
    "reference": null,
    "outputs": {"trajectory": true, "report": true}
  })");
  return d;
}

void reject_unknown_keys(const json& user, const json& reference, const std::string& prefix) {
  if (!user.is_object() || !reference.is_object() || reference.contains("profile")) {
    return;
  }
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!reference.contains(key)) {
      throw ScenarioError("field '" + path + "': unknown key");
    }
    reject_unknown_keys(value, reference.at(key), path);
  }
}

const json& at_path(const json& doc, const std::string& path) {
  const json* node = &doc;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!node->is_object() || !node->contains(part)) {
      throw ScenarioError("field '" + path + "': missing");
    }
    node = &node->at(part);
  }
  return *node;
}

double get_number(const json& doc, const std::string& path) {
  const json& v = at_path(doc, path);
  if (!v.is_number()) {
    throw ScenarioError("field '" + path + "': expected a number, got " + std::string(v.type_name()));
  }
  const double x = v.get<double>();
  if (!std::isfinite(x)) {
    throw ScenarioError("field '" + path + "': must be finite");
  }
  return x;
}

double get_positive(const json& doc, const std::string& path) {
  const double x = get_number(doc, path);
  if (!(x > 0.0)) {
    throw ScenarioError("field '" + path + "': must be positive");
  }
  return x;
}

std::size_t get_count(const json& doc, const std::string& path) {
  const json& v = at_path(doc, path);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ScenarioError("field '" + path + "': expected a positive integer");
  }
  return v.get<std::size_t>();
}

std::string get_string(const json& doc, const std::string& path) {
  const json& v = at_path(doc, path);
  if (!v.is_string()) {
    throw ScenarioError("field '" + path + "': expected a string, got " + std::string(v.type_name()));
  }
  return v.get<std::string>();
}

[[noreturn]] void unknown_kind(const std::string& path, const std::string& kind) {
  throw ScenarioError("field '" + path + "': unknown kind '" + kind + "'");
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

OperatorA build_a(const json& doc, const Grid& grid, double p) {
  const std::string kind = get_string(doc, "operator_A.kind");
  const double scale = get_number(doc, "operator_A.scale");
  if (kind == "p_laplacian") return OperatorA::p_laplacian(grid, p);
  if (kind == "identity") return OperatorA::identity(grid, scale);
  if (kind == "laplacian") return OperatorA::laplacian(grid);
  if (kind == "laplacian_plus_identity") return OperatorA::laplacian_plus_identity(grid);
  if (kind == "negated_laplacian") return OperatorA::negated_laplacian(grid);
  if (kind == "exp_entrywise") return OperatorA::exp_entrywise(grid);
  if (kind == "sign_switch") return OperatorA::sign_switch(grid);
  unknown_kind("operator_A.kind", kind);
}

OperatorB build_b(const json& doc, const Grid& grid) {
  const std::string kind = get_string(doc, "operator_B.kind");
  OperatorB b = [&] {
    if (kind == "laplacian") return OperatorB::laplacian(grid);
    if (kind == "fractional_laplacian") return OperatorB::fractional_laplacian(grid, get_number(doc, "operator_B.s"));
    if (kind == "identity") return OperatorB::identity_scaled(grid, get_number(doc, "operator_B.scale"));
    unknown_kind("operator_B.kind", kind);
  }();
  const double asym = get_number(doc, "operator_B.asymmetry");
  return asym != 0.0 ? b.with_asymmetry(asym) : b;
}

SetField build_field(const json& doc, const Grid& grid) {
  const double gain = get_number(doc, "field.base.gain");
  const double amplitude = get_number(doc, "field.base.amplitude");
  const double omega = get_number(doc, "field.base.omega");
  const State profile = build_profile(at_path(doc, "field.base.profile"), grid, "field.base.profile");
  auto base = [gain, amplitude, omega, profile](double t, const State& v) -> State {
    return -gain * v + amplitude * std::cos(omega * t) * profile;
  };

  const std::string kind = get_string(doc, "field.kind");
  if (kind == "singleton") {
    return SetField::singleton(grid, base);
  }
  if (kind == "ball") {
    const double r = get_number(doc, "field.radius");
    if (r < 0.0) {
      throw ScenarioError("field 'field.radius': must be nonnegative");
    }
    return SetField::ball(grid, base, [r](double, const State&) { return r; });
  }
  if (kind == "box") {
    const double hw = get_number(doc, "field.half_width");
    if (hw < 0.0) {
      throw ScenarioError("field 'field.half_width': must be nonnegative");
    }
    return SetField::box(
        grid, [base, hw](double t, const State& v) -> State { return base(t, v).array() - hw; },
        [base, hw](double t, const State& v) -> State { return base(t, v).array() + hw; });
  }
  if (kind == "polytope") {
    const json& verts = at_path(doc, "field.vertices");
    if (!verts.is_array() || verts.empty() || verts.size() > kMaxPolytopeVertices) {
      throw ScenarioError("field 'field.vertices': expected 1 to 8 vertex entries");
    }
    std::vector<VectorMap> maps;
    for (std::size_t k = 0; k < verts.size(); ++k) {
      const std::string where = "field.vertices." + std::to_string(k);
      if (!verts[k].is_object()) {
        throw ScenarioError("field '" + where + "': expected an object with mode and shift");
      }
      const std::size_t mode = get_count(verts[k], "mode");
      if (mode > grid.n) {
        throw ScenarioError("field '" + where + ".mode': exceeds the number of grid nodes");
      }
      const double shift = get_number(verts[k], "shift");
      State e = laplacian_eigenvector(grid, mode);
      e /= h_norm(e, grid);
      maps.emplace_back([base, shift, e](double t, const State& v) -> State { return base(t, v) + shift * e; });
    }
    return SetField::polytope(grid, std::move(maps));
  }
  unknown_kind("field.kind", kind);
}

SelectionRule build_rule(const json& doc, const Grid& grid) {
  const std::string rule = get_string(doc, "solver.rule");
  if (rule == "minimal_norm") return MinimalNorm{};
  if (rule == "project_previous") return ProjectPrevious{};
  if (rule == "constant_center") return ConstantCenter{};
  if (rule == "extremal") {
    State d = build_profile(at_path(doc, "solver.direction"), grid, "solver.direction");
    if (d.isZero(0.0)) {
      throw ScenarioError("field 'solver.direction': must be nonzero");
    }
    return Extremal{std::move(d)};
  }
  unknown_kind("solver.rule", rule);
}

}  // namespace

json load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ScenarioError("cannot open scenario file '" + path + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    std::ostringstream os;
    os << path << ": syntax error at line " << line << ", column " << column << ": " << e.what();
    throw ScenarioError(os.str());
  }
}

void apply_override(json& document, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ScenarioError("override '" + assignment + "': expected key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &document;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) {
      throw ScenarioError("override '" + key + "': '" + parts[i] + "' is not an object");
    }
    node = &(*node)[parts[i]];
    if (node->is_null()) {
      *node = json::object();
    }
  }
  if (!node->is_object()) {
    throw ScenarioError("override '" + key + "': parent is not an object");
  }
  (*node)[parts.back()] = std::move(value);
}

State build_profile(const json& spec, const Grid& grid, const std::string& where) {
  if (!spec.is_object()) {
    throw ScenarioError("field '" + where + "': expected a profile object");
  }
  const std::string kind = spec.value("profile", std::string("zero"));
  const double amplitude = spec.contains("amplitude") ? get_number(spec, "amplitude") : 1.0;
  const auto n = static_cast<Eigen::Index>(grid.n);
  if (kind == "zero") return State::Zero(n);
  if (kind == "constant") return State::Constant(n, amplitude);
  if (kind == "tent") return amplitude * tent_function(grid);
  if (kind == "sine") {
    const std::size_t mode = spec.contains("mode") ? get_count(spec, "mode") : 1;
    State v(n);
    for (std::size_t i = 0; i < grid.n; ++i) {
      v[static_cast<Eigen::Index>(i)] =
          amplitude * std::sin(static_cast<double>(mode) * std::numbers::pi * grid.x(i) / grid.length);
    }
    return v;
  }
  if (kind == "values") {
    if (!spec.contains("values") || !spec["values"].is_array() || spec["values"].size() != grid.n) {
      throw ScenarioError("field '" + where + ".values': expected " + std::to_string(grid.n) + " numbers");
    }
    State v(n);
    for (std::size_t i = 0; i < grid.n; ++i) {
      if (!spec["values"][i].is_number()) {
        throw ScenarioError("field '" + where + ".values': entries must be numbers");
      }
      v[static_cast<Eigen::Index>(i)] = amplitude * spec["values"][i].get<double>();
    }
    return v;
  }
  throw ScenarioError("field '" + where + ".profile': unknown profile '" + kind + "'");
}

Scenario build_scenario(const json& user) {
  if (!user.is_object()) {
    throw ScenarioError("scenario: top level must be an object");
  }
  reject_unknown_keys(user, defaults(), "");
  json doc = defaults();
  doc.merge_patch(user);

  const std::string name = get_string(doc, "name");
  if (!at_path(doc, "seed").is_number_unsigned()) {
    throw ScenarioError("field 'seed': expected a nonnegative integer");
  }
  const auto seed = doc["seed"].get<std::uint64_t>();

  std::optional<std::string> reference;
  if (doc.contains("reference") && !doc["reference"].is_null()) {
    const std::string ref = get_string(doc, "reference");
    if (ref != "scalar_damped_cosine") {
      unknown_kind("reference", ref);
    }
    if (get_count(doc, "grid.nodes") != 1) {
      throw ScenarioError("field 'reference': scalar_damped_cosine needs grid.nodes = 1");
    }
    reference = ref;
  }

  try {
    const Grid grid = Grid::make(get_count(doc, "grid.nodes"), get_positive(doc, "grid.length"));
    const TimeMesh mesh = TimeMesh::make(get_positive(doc, "time.final_time"), get_count(doc, "time.steps"));
    const double p = get_number(doc, "exponent_p");
    if (p < 2.0) {
      throw ScenarioError("field 'exponent_p': must be at least 2");
    }
    const Exponents exps = Exponents::from_p(p);
    const double lambda = get_positive(doc, "memory.lambda_per_time");

    ProblemData problem{grid,
                        mesh,
                        lambda,
                        build_profile(at_path(doc, "initial.u0"), grid, "initial.u0"),
                        build_profile(at_path(doc, "initial.v0"), grid, "initial.v0"),
                        build_a(doc, grid, p),
                        build_b(doc, grid),
                        build_field(doc, grid),
                        exps};
    problem.validate();

    const double a0 = get_number(doc, "envelope.a");
    if (a0 < 0.0) {
      throw ScenarioError("field 'envelope.a': must be nonnegative");
    }
    GrowthEnvelope envelope = GrowthEnvelope::constant(mesh, a0, get_number(doc, "envelope.b"), exps.q);

    SolverSettings s;
    const std::string method = get_string(doc, "solver.method");
    if (method == "marching") {
      s.method = Method::Marching;
    } else if (method == "fixed_point") {
      s.method = Method::FixedPoint;
    } else {
      unknown_kind("solver.method", method);
    }
    s.rule = build_rule(doc, grid);
    s.tol_newton = get_positive(doc, "solver.tol_newton");
    s.max_newton_iter = get_count(doc, "solver.max_newton_iter");
    s.tol_fp = get_positive(doc, "solver.tol_fp");
    s.k_max = get_count(doc, "solver.k_max");
    s.tol_set = get_positive(doc, "solver.tol_set");
    s.tol_equation = get_positive(doc, "solver.tol_equation");
    return Scenario{name, seed, std::move(problem), std::move(envelope), std::move(s), reference, doc};
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }
}

std::uint64_t scenario_hash(const json& document) {
  const std::string text = document.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

State scalar_damped_cosine(double t) {
  State v(1);
  v[0] = std::exp(-t) * std::cos(t);
  return v;
}

}  // namespace memincl::app
