#include "io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace memincl::app {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(const std::filesystem::path& path, const std::vector<double>& times, const std::vector<State>& values) {
  if (times.size() != values.size()) {
    throw std::invalid_argument("write_csv: times and values differ in length");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  const Eigen::Index n = values.empty() ? 0 : values.front().size();
  out << "time";
  for (Eigen::Index i = 0; i < n; ++i) {
    out << ",node_" << (i + 1);
  }
  out << '\n';
  for (std::size_t r = 0; r < values.size(); ++r) {
    out << format_double(times[r]);
    for (Eigen::Index i = 0; i < n; ++i) {
      out << ',' << format_double(values[r][i]);
    }
    out << '\n';
  }
}

CsvSeries read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line.rfind("time", 0) != 0) {
    throw std::runtime_error(path.string() + ": missing header");
  }
  const auto columns = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
  CsvSeries series;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) {
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        cells.push_back(std::stod(cell, &used));
        if (used != cell.size()) {
          throw std::invalid_argument(cell);
        }
      } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ": bad number on row " + std::to_string(row));
      }
    }
    if (static_cast<Eigen::Index>(cells.size()) != columns + 1) {
      throw std::runtime_error(path.string() + ": wrong column count on row " + std::to_string(row));
    }
    series.times.push_back(cells[0]);
    series.values.emplace_back(Eigen::Map<const State>(cells.data() + 1, columns));
  }
  return series;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& document) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << document.dump(2) << '\n';
}

}  // namespace memincl::app
