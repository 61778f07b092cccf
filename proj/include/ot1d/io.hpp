#pragma once

#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ot1d/measure.hpp"
#include "ot1d/numeric.hpp"
#include "ot1d/transport.hpp"

namespace ot1d {

namespace detail {

inline std::vector<double> number_array(const nlohmann::json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_array()) {
    throw std::invalid_argument("measure JSON: missing array field \"" + field + "\"");
  }
  std::vector<double> out;
  out.reserve(j[field].size());
  for (const auto& v : j[field]) {
    if (!v.is_number()) {
      throw std::invalid_argument("measure JSON: field \"" + field + "\" must contain numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

inline double number_field(const nlohmann::json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_number()) {
    throw std::invalid_argument("measure JSON: missing numeric field \"" + field + "\"");
  }
  return j[field].get<double>();
}

} // namespace detail

/// Measure formats:
///   {"type":"discrete","atoms":[...],"weights":[...]}
///   {"type":"samples","values":[...]}
///   {"type":"uniform","a":..,"b":..}
///   {"type":"gaussian","mean":..,"std":..}
inline QuantileCurve parse_measure_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw std::invalid_argument("measure JSON must be an object with a string \"type\" field");
  }
  const std::string type = j["type"].get<std::string>();
  if (type == "discrete") {
    return QuantileCurve(
        DiscreteMeasure(detail::number_array(j, "atoms"), detail::number_array(j, "weights")));
  }
  if (type == "samples") {
    const std::vector<double> values = detail::number_array(j, "values");
    return QuantileCurve(DiscreteMeasure::from_samples(values));
  }
  if (type == "uniform") {
    return QuantileCurve::uniform(detail::number_field(j, "a"), detail::number_field(j, "b"));
  }
  if (type == "gaussian") {
    return QuantileCurve::gaussian(detail::number_field(j, "mean"),
                                   detail::number_field(j, "std"));
  }
  throw std::invalid_argument("unknown measure type \"" + type + "\"");
}

inline nlohmann::json measure_to_json(const DiscreteMeasure& m) {
  return nlohmann::json{{"type", "discrete"}, {"atoms", m.atoms()}, {"weights", m.weights()}};
}

/// One real per line; blank lines and lines starting with '#' are skipped.
inline std::vector<double> read_reals_csv(std::istream& in) {
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(line.substr(first), &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("sample CSV line " + std::to_string(line_no) +
                                  ": not a number: '" + line + "'");
    }
    const auto rest = line.find_first_not_of(" \t\r", first + used);
    if (rest != std::string::npos) {
      throw std::invalid_argument("sample CSV line " + std::to_string(line_no) +
                                  ": trailing characters: '" + line + "'");
    }
    out.push_back(value);
  }
  return out;
}

/// Loads a measure from disk: JSON when the first non-blank byte is '{',
/// otherwise a one-real-per-line sample file.
inline QuantileCurve read_measure_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open measure file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  const auto first = content.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) {
    throw std::invalid_argument("measure file '" + path + "' is empty");
  }
  if (content[first] == '{') {
    return parse_measure_json(nlohmann::json::parse(content));
  }
  std::istringstream csv(content);
  const std::vector<double> samples = read_reals_csv(csv);
  if (samples.empty()) {
    throw std::invalid_argument("measure file '" + path + "' contains no samples");
  }
  return QuantileCurve(DiscreteMeasure::from_samples(samples));
}

inline std::string plan_to_csv(const TransportPlan& plan) {
  std::ostringstream out;
  out << "x,y,mass\n";
  for (const auto& e : plan.entries()) {
    out << format_double(plan.source().atom(e.i)) << ',' << format_double(plan.target().atom(e.j))
        << ',' << format_double(e.mass) << '\n';
  }
  return out.str();
}

inline std::string quantiles_to_csv(const std::vector<double>& grid, const std::vector<double>& psi) {
  if (grid.size() != psi.size()) {
    throw std::invalid_argument("quantiles_to_csv: grid/psi length mismatch");
  }
  std::ostringstream out;
  out << "p,psi\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << format_double(grid[i]) << ',' << format_double(psi[i]) << '\n';
  }
  return out.str();
}

} // namespace ot1d
