#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sphereproc/pattern.hpp"

namespace sphereproc {

// Pattern files come in pairs: a CSV with one point per row (columns
// y1..yd,u1..u{k+1}) and a JSON sidecar {d, k, lower, upper} describing the
// window. The sidecar path is the CSV path with its extension replaced by
// ".json".
inline std::string sidecar_path(const std::string& csv_path) {
  const auto slash = csv_path.find_last_of("/\\");
  const auto dot = csv_path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return csv_path + ".json";
  return csv_path.substr(0, dot) + ".json";
}

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& field, std::size_t line_no) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r')) --end;
  double value = 0.0;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    throw std::runtime_error("pattern CSV: cannot parse number '" + field + "' at line " +
                             std::to_string(line_no));
  return value;
}

}  // namespace detail

inline void write_pattern(const SpaceSpherePattern& x, const std::string& csv_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("write_pattern: cannot open " + csv_path);
  const int d = x.window().dim();
  const int kc = x.sphere_dim() + 1;
  for (int a = 0; a < d; ++a) csv << "y" << (a + 1) << ",";
  for (int a = 0; a < kc; ++a) csv << "u" << (a + 1) << (a + 1 < kc ? "," : "");
  csv << "\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int a = 0; a < d; ++a) csv << detail::format_double(x.spatial_at(i)[a]) << ",";
    for (int a = 0; a < kc; ++a)
      csv << detail::format_double(x.direction_at(i)[a]) << (a + 1 < kc ? "," : "");
    csv << "\n";
  }
  if (!csv) throw std::runtime_error("write_pattern: write failed for " + csv_path);

  nlohmann::ordered_json meta;
  meta["d"] = d;
  meta["k"] = x.sphere_dim();
  meta["lower"] = x.window().lower;
  meta["upper"] = x.window().upper;
  std::ofstream side(sidecar_path(csv_path));
  if (!side) throw std::runtime_error("write_pattern: cannot open " + sidecar_path(csv_path));
  side << meta.dump(2) << "\n";
}

inline SpaceSpherePattern read_pattern(const std::string& csv_path, bool strict_norm = false) {
  std::ifstream side(sidecar_path(csv_path));
  if (!side) throw std::runtime_error("read_pattern: missing sidecar " + sidecar_path(csv_path));
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const std::exception& e) {
    throw std::runtime_error("read_pattern: bad sidecar JSON: " + std::string(e.what()));
  }
  const int d = meta.at("d").get<int>();
  const int k = meta.at("k").get<int>();
  BoxWindow window(meta.at("lower").get<std::vector<double>>(),
                   meta.at("upper").get<std::vector<double>>());
  if (window.dim() != d) throw std::runtime_error("read_pattern: sidecar d/window mismatch");

  std::ifstream csv(csv_path);
  if (!csv) throw std::runtime_error("read_pattern: cannot open " + csv_path);
  std::string line;
  if (!std::getline(csv, line)) throw std::runtime_error("read_pattern: empty file " + csv_path);
  const std::size_t expect_cols = static_cast<std::size_t>(d + k + 1);
  if (detail::split_csv_row(line).size() != expect_cols)
    throw std::runtime_error("read_pattern: header has wrong column count in " + csv_path);

  std::vector<SpatialPoint> spatial;
  std::vector<SpherePoint> directions;
  std::size_t line_no = 1;
  while (std::getline(csv, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_row(line);
    if (fields.size() != expect_cols)
      throw std::runtime_error("pattern CSV: expected " + std::to_string(expect_cols) +
                               " fields, got " + std::to_string(fields.size()) + " at line " +
                               std::to_string(line_no));
    std::vector<double> y(d), u(k + 1);
    for (int a = 0; a < d; ++a) y[a] = detail::parse_double(fields[a], line_no);
    for (int a = 0; a <= k; ++a) u[a] = detail::parse_double(fields[d + a], line_no);
    spatial.emplace_back(std::move(y));
    try {
      directions.emplace_back(std::move(u), strict_norm);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("pattern CSV: invalid direction at line " +
                               std::to_string(line_no) + ": " + e.what());
    }
  }
  return SpaceSpherePattern(std::move(window), k, std::move(spatial), std::move(directions));
}

}  // namespace sphereproc
