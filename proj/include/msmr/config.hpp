#pragma once

// JSON configuration for workloads and sweeps.
//
//   {
//     "axis": "beta",                      // beta | heavy | gamma
//     "values": ["0.05", "0.10"],          // heavy points read "0.05:0.05:0.01"
//     "cases": 200,
//     "methods": ["DM", "DMR", "OPDCA", "OPT", "DCMP"],
//     "mode": "edge",
//     "seed": 1,
//     "opt_budget": 20000,
//     "workload": { "aps": 8, "servers": 6, "jobs": 30, ... }
//   }
//
// Rationals may be written as strings ("3/20", "0.15") or JSON numbers; numbers
// are read through their shortest decimal text, so 0.15 means exactly 15/100.

#include <set>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "msmr/dca.hpp"
#include "msmr/experiment.hpp"
#include "msmr/rational.hpp"
#include "msmr/workload.hpp"

namespace msmr::config {

using nlohmann::json;

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline Rational rational_of(const json& v, const std::string& key) {
  try {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number()) return parse_rational(v.dump());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
  throw ConfigError(key + ": expected a number or a string");
}

inline std::uint64_t unsigned_of(const json& v, const std::string& key) {
  if (!v.is_number_unsigned()) throw ConfigError(key + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline std::string text_of(const json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

inline void check_keys(const json& obj, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

inline workload::TimeRange range_of(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(key + ": expected [lo, hi]");
  return {unsigned_of(v[0], key), unsigned_of(v[1], key)};
}

/// Overrides fields of `cfg` with the keys present in `obj`.
inline void apply_workload(const json& obj, workload::EdgeConfig& cfg) {
  check_keys(obj,
             {"aps", "servers", "jobs", "offload", "compute", "download", "beta", "heavy",
              "gamma", "deadline_stretch", "seed", "max_attempts"},
             "workload");
  if (obj.contains("aps")) cfg.num_aps = unsigned_of(obj["aps"], "aps");
  if (obj.contains("servers")) cfg.num_servers = unsigned_of(obj["servers"], "servers");
  if (obj.contains("jobs")) cfg.num_jobs = unsigned_of(obj["jobs"], "jobs");
  if (obj.contains("offload")) cfg.offload = range_of(obj["offload"], "offload");
  if (obj.contains("compute")) cfg.compute = range_of(obj["compute"], "compute");
  if (obj.contains("download")) cfg.download = range_of(obj["download"], "download");
  if (obj.contains("beta")) cfg.beta = rational_of(obj["beta"], "beta");
  if (obj.contains("gamma")) cfg.gamma = rational_of(obj["gamma"], "gamma");
  if (obj.contains("deadline_stretch"))
    cfg.deadline_stretch = rational_of(obj["deadline_stretch"], "deadline_stretch");
  if (obj.contains("seed")) cfg.seed = unsigned_of(obj["seed"], "seed");
  if (obj.contains("max_attempts"))
    cfg.max_attempts = unsigned_of(obj["max_attempts"], "max_attempts");
  if (obj.contains("heavy")) {
    const json& h = obj["heavy"];
    if (!h.is_array()) throw ConfigError("heavy: expected an array of three ratios");
    cfg.per_stage_heavy.clear();
    for (const json& v : h) cfg.per_stage_heavy.push_back(rational_of(v, "heavy"));
  }
}

inline experiment::ExperimentSpec parse_experiment(const json& doc) {
  check_keys(doc, {"axis", "values", "cases", "methods", "mode", "seed", "opt_budget", "workload"},
             "sweep config");
  experiment::ExperimentSpec spec;
  if (doc.contains("axis")) {
    const auto axis = experiment::parse_axis(text_of(doc["axis"]));
    if (!axis) throw ConfigError("axis: expected beta, heavy or gamma");
    spec.axis = *axis;
  }
  if (!doc.contains("values") || !doc["values"].is_array())
    throw ConfigError("values: expected an array of axis values");
  for (const json& v : doc["values"]) {
    try {
      spec.points.push_back(experiment::parse_point(spec.axis, text_of(v)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("values: ") + e.what());
    }
  }
  if (doc.contains("cases")) spec.cases = unsigned_of(doc["cases"], "cases");
  if (doc.contains("methods")) {
    if (!doc["methods"].is_array()) throw ConfigError("methods: expected an array");
    spec.methods.clear();
    for (const json& m : doc["methods"]) {
      const auto method = experiment::parse_method(text_of(m));
      if (!method) throw ConfigError("methods: unknown method '" + text_of(m) + "'");
      spec.methods.push_back(*method);
    }
  }
  if (doc.contains("mode")) {
    const auto mode = parse_mode(text_of(doc["mode"]));
    if (!mode) throw ConfigError("mode: unknown mode '" + text_of(doc["mode"]) + "'");
    spec.mode = *mode;
  }
  if (doc.contains("seed")) spec.seed = unsigned_of(doc["seed"], "seed");
  if (doc.contains("opt_budget")) spec.opt_budget = unsigned_of(doc["opt_budget"], "opt_budget");
  if (doc.contains("workload")) apply_workload(doc["workload"], spec.base);
  return spec;
}

inline experiment::ExperimentSpec parse_experiment_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("sweep config: ") + e.what());
  }
  return parse_experiment(doc);
}

}  // namespace msmr::config
