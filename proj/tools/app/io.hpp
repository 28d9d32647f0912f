#pragma once

// Plain-text artifacts: trajectory CSV with 17 significant digits (exact
// round trip for doubles) and pretty-printed JSON.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "memincl/spaces.hpp"

namespace memincl::app {

struct CsvSeries {
  std::vector<double> times;
  std::vector<State> values;
};

/// Header "time,node_1,...,node_n"; one row per entry.
void write_csv(const std::filesystem::path& path, const std::vector<double>& times, const std::vector<State>& values);

/// Throws std::runtime_error on a malformed file.
[[nodiscard]] CsvSeries read_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& document);

/// Shortest exact decimal of a double (%.17g).
[[nodiscard]] std::string format_double(double x);

}  // namespace memincl::app
