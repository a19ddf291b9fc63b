#pragma once

#include <string>

#include <json.hpp>

#include "curvkit/connection.hpp"
#include "curvkit/version.hpp"

namespace curvkit {

using json = nlohmann::ordered_json;

/// Verification report with a fixed serialization. Everything in it is a
/// pure function of the inputs (no timing, no environment), so reruns with
/// the same flags produce byte-identical files.
struct Report {
  std::string example;
  json params = json::object();
  json grid = json::object();
  json residuals = json::object();
  json convergence = json::array();
  json scan = json::array();
  bool pass = false;
  json tolerances = json::object();

  void add_residual(const std::string& component, double max_v, double l2_v) {
    residuals[component] = {{"max", max_v}, {"l2", l2_v}};
  }
  void add_residuals(const NormReport& norms, const std::string& suffix = "") {
    for (const auto& [name, n] : norms.components)
      add_residual(name + suffix, n.max, n.l2);
  }
  void add_convergence(double h, double residual) {
    convergence.push_back({{"h", h}, {"residual", residual}});
  }
  void add_scan(const std::string& param, double residual) {
    scan.push_back({{"param", param}, {"residual", residual}});
  }

  json to_json() const {
    json j;
    j["example"] = example;
    j["params"] = params;
    j["grid"] = grid;
    j["residuals"] = residuals;
    j["convergence"] = convergence;
    j["scan"] = scan;
    j["pass"] = pass;
    j["tolerances"] = tolerances;
    j["version"] = kVersion;
    return j;
  }

  std::string serialize() const { return to_json().dump(2) + "\n"; }
};

/// Structural validation of a serialized report against the published
/// schema (docs/report_schema.json): required keys, types, and the shapes
/// of residual/convergence/scan entries.
inline bool validate_report_json(const nlohmann::json& j, std::string* why = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (!j.is_object()) return fail("report is not an object");
  for (const char* key : {"example", "params", "grid", "residuals", "convergence",
                          "scan", "pass", "tolerances", "version"})
    if (!j.contains(key)) return fail(std::string("missing key: ") + key);
  if (!j["example"].is_string()) return fail("example must be a string");
  if (!j["params"].is_object()) return fail("params must be an object");
  if (!j["grid"].is_object()) return fail("grid must be an object");
  if (!j["residuals"].is_object()) return fail("residuals must be an object");
  for (const auto& [name, entry] : j["residuals"].items()) {
    if (!entry.is_object() || !entry.contains("max") || !entry.contains("l2"))
      return fail("residual " + name + " needs max and l2");
    if (!entry["max"].is_number() || !entry["l2"].is_number())
      return fail("residual " + name + " norms must be numbers");
  }
  if (!j["convergence"].is_array()) return fail("convergence must be an array");
  for (const auto& entry : j["convergence"]) {
    if (!entry.is_object() || !entry.contains("h") || !entry.contains("residual"))
      return fail("convergence entries need h and residual");
    if (!entry["h"].is_number() || !entry["residual"].is_number())
      return fail("convergence entries must be numeric");
  }
  if (!j["scan"].is_array()) return fail("scan must be an array");
  for (const auto& entry : j["scan"]) {
    if (!entry.is_object() || !entry.contains("param") || !entry.contains("residual"))
      return fail("scan entries need param and residual");
    if (!entry["param"].is_string() || !entry["residual"].is_number())
      return fail("scan entries must be {string, number}");
  }
  if (!j["pass"].is_boolean()) return fail("pass must be a boolean");
  if (!j["tolerances"].is_object()) return fail("tolerances must be an object");
  for (const auto& [name, v] : j["tolerances"].items())
    if (!v.is_number()) return fail("tolerance " + name + " must be a number");
  if (!j["version"].is_string()) return fail("version must be a string");
  return true;
}

}  // namespace curvkit
