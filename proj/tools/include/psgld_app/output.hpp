// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "psgld/trace.hpp"

namespace psgld::app {

inline constexpr int kMetricsSchemaVersion = 1;

struct Metric {
  std::string name;
  double value = 0.0;
  std::string units;
};

/// CSV table written as curve_<name>.csv. Cells are preformatted text.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells);
};

std::string cell(double v);
std::string cell(std::size_t v);

/// Everything one command produces. Only `timing` may differ between two
/// runs with the same inputs and seed.
struct RunOutput {
  std::string command;
  std::string name;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  std::vector<Metric> metrics;
  std::map<std::string, double> timing;
  std::vector<Table> curves;
  std::vector<std::pair<std::string, SampleTrace>> traces;

  /// Throws psgld::Error on a non-finite value or a duplicate name.
  void add_metric(std::string metric_name, double value, std::string units);
  /// Throws psgld::Error when the metric is missing.
  double metric(const std::string& metric_name) const;
  bool has_metric(const std::string& metric_name) const;
};

nlohmann::json metrics_json(const RunOutput& out);

/// Returns an empty string when doc has the documented shape, otherwise a
/// description of the first problem.
std::string check_metrics_schema(const nlohmann::json& doc);

/// Writes metrics.json, curve_<name>.csv and trace_<name>.csv into dir,
/// creating it if needed. Returns the paths written, metrics.json first.
std::vector<std::filesystem::path> write_outputs(const RunOutput& out,
                                                 const std::filesystem::path& dir);

}  // namespace psgld::app
