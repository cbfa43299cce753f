// SPDX-License-Identifier: Apache-2.0
#include "psgld_app/output.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "psgld/data_io.hpp"
#include "psgld/errors.hpp"
#include "psgld/numfmt.hpp"

namespace psgld::app {

using nlohmann::json;

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns.size())
    throw Error("table " + name + ": row has " + std::to_string(cells.size()) + " cells, expected " +
                std::to_string(columns.size()));
  rows.push_back(std::move(cells));
}

std::string cell(double v) { return format_double(v); }
std::string cell(std::size_t v) { return std::to_string(v); }

void RunOutput::add_metric(std::string metric_name, double value, std::string units) {
  if (!std::isfinite(value)) throw Error("metric " + metric_name + " is not finite");
  if (has_metric(metric_name)) throw Error("duplicate metric " + metric_name);
  metrics.push_back(Metric{std::move(metric_name), value, std::move(units)});
}

bool RunOutput::has_metric(const std::string& metric_name) const {
  return std::any_of(metrics.begin(), metrics.end(),
                     [&](const Metric& m) { return m.name == metric_name; });
}

double RunOutput::metric(const std::string& metric_name) const {
  for (const Metric& m : metrics)
    if (m.name == metric_name) return m.value;
  throw Error("no metric named " + metric_name);
}

json metrics_json(const RunOutput& out) {
  json doc;
  doc["schema_version"] = kMetricsSchemaVersion;
  doc["command"] = out.command;
  doc["name"] = out.name;
  doc["seed"] = out.seed;
  doc["config"] = json::object();
  for (const auto& [k, v] : out.config) doc["config"][k] = v;
  doc["metrics"] = json::array();
  for (const Metric& m : out.metrics)
    doc["metrics"].push_back({{"name", m.name}, {"value", m.value}, {"units", m.units}});
  doc["curves"] = json::array();
  for (const Table& t : out.curves)
    doc["curves"].push_back(
        {{"name", t.name}, {"file", "curve_" + t.name + ".csv"}, {"columns", t.columns}, {"rows", t.rows.size()}});
  doc["traces"] = json::array();
  for (const auto& [name, tr] : out.traces)
    doc["traces"].push_back({{"name", name},
                             {"file", "trace_" + name + ".csv"},
                             {"algorithm", tr.algorithm},
                             {"samples", tr.size()}});
  doc["timing"] = json::object();
  for (const auto& [k, v] : out.timing) doc["timing"][k] = std::isfinite(v) ? v : 0.0;
  return doc;
}

namespace {

bool all_finite_numbers(const json& j) {
  if (j.is_number_float()) return std::isfinite(j.get<double>());
  if (j.is_structured())
    return std::all_of(j.begin(), j.end(), [](const json& c) { return all_finite_numbers(c); });
  return true;
}

}  // namespace

std::string check_metrics_schema(const json& doc) {
  if (!doc.is_object()) return "document is not an object";
  if (!doc.contains("schema_version") || doc["schema_version"] != kMetricsSchemaVersion)
    return "schema_version missing or unsupported";
  for (const char* key : {"command", "name"})
    if (!doc.contains(key) || !doc[key].is_string()) return std::string(key) + " must be a string";
  if (!doc.contains("seed") || !doc["seed"].is_number_unsigned()) return "seed must be an unsigned integer";
  if (!doc.contains("config") || !doc["config"].is_object()) return "config must be an object";
  for (const auto& [k, v] : doc["config"].items())
    if (!v.is_string()) return "config." + k + " must be a string";
  if (!doc.contains("metrics") || !doc["metrics"].is_array()) return "metrics must be an array";
  for (const json& m : doc["metrics"]) {
    if (!m.is_object() || !m.contains("name") || !m["name"].is_string()) return "metric without name";
    if (!m.contains("value") || !m["value"].is_number()) return "metric " + m["name"].get<std::string>() + " has no value";
    if (!m.contains("units") || !m["units"].is_string()) return "metric " + m["name"].get<std::string>() + " has no units";
  }
  for (const char* key : {"curves", "traces"}) {
    if (!doc.contains(key) || !doc[key].is_array()) return std::string(key) + " must be an array";
    for (const json& c : doc[key])
      if (!c.is_object() || !c.contains("name") || !c.contains("file") || !c["file"].is_string())
        return std::string(key) + " entries need name and file";
  }
  if (!doc.contains("timing") || !doc["timing"].is_object()) return "timing must be an object";
  if (!all_finite_numbers(doc)) return "non-finite number";
  return {};
}

std::vector<std::filesystem::path> write_outputs(const RunOutput& out,
                                                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  auto open = [&](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    written.push_back(p);
    return f;
  };

  {
    auto f = open(dir / "metrics.json");
    f << metrics_json(out).dump(2) << '\n';
  }
  for (const Table& t : out.curves) {
    auto f = open(dir / ("curve_" + t.name + ".csv"));
    for (std::size_t i = 0; i < t.columns.size(); ++i) f << (i ? "," : "") << t.columns[i];
    f << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
      f << '\n';
    }
  }
  for (const auto& [name, tr] : out.traces) {
    auto f = open(dir / ("trace_" + name + ".csv"));
    write_trace(tr, f);
  }
  return written;
}

}  // namespace psgld::app
