#pragma once

// JSON form of ExperimentConfig. Keys mirror the struct fields; unknown
// keys are rejected.
//
//   {
//     "n1": 30, "n2": 30, "rank": 2,
//     "lambda_grid": [8, 16, 32, 64],
//     "m": 1, "trials": 100,
//     "dither_rule": "beta_over_3",        // or "fixed"
//     "dither_sigma": 1.0,                 // used by "fixed"
//     "dynamic_range": "max_abs",          // or "half_peak_to_peak"
//     "dither_calibration": "clean",       // or "noisy"
//     "noise_std": 0.0,
//     "normalize_truth": true,
//     "record_kappa": true,
//     "solver": {"budget_epochs": 50, "violation_tol": 1e-6, "trace_every": 0},
//     "master_seed": 20240101
//   }

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "onebit/error.hpp"
#include "onebit/experiment.hpp"

namespace onebit {

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& known,
                           const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!known.contains(item.key())) {
      throw ConfigError("unknown config key '" + where + item.key() + "'");
    }
  }
}

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config key '" + where + key + "': " + e.what());
  }
}

inline void read_count(const nlohmann::json& obj, const char* key, Index& out,
                       const std::string& where) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError("config key '" + where + key + "' must be an integer");
  out = v.get<Index>();
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown(j,
                         {"n1", "n2", "rank", "lambda_grid", "m", "trials", "dither_rule",
                          "dither_sigma", "dynamic_range", "dither_calibration", "noise_std",
                          "normalize_truth", "record_kappa", "solver", "master_seed"},
                         "");
  ExperimentConfig cfg;
  detail::read_count(j, "n1", cfg.n1, "");
  detail::read_count(j, "n2", cfg.n2, "");
  detail::read_count(j, "rank", cfg.rank, "");
  detail::read_count(j, "m", cfg.m, "");
  detail::read_field(j, "lambda_grid", cfg.lambda_grid, "");
  if (j.contains("trials")) {
    if (!j["trials"].is_number_integer() || j["trials"].get<long long>() < 1) {
      throw ConfigError("config key 'trials' must be a positive integer");
    }
    cfg.trials = j["trials"].get<std::size_t>();
  }
  detail::read_field(j, "dither_sigma", cfg.dither_sigma, "");
  detail::read_field(j, "noise_std", cfg.noise_std, "");
  detail::read_field(j, "normalize_truth", cfg.normalize_truth, "");
  detail::read_field(j, "record_kappa", cfg.record_kappa, "");
  if (j.contains("master_seed")) {
    if (!j["master_seed"].is_number_unsigned()) {
      throw ConfigError("config key 'master_seed' must be an unsigned 64-bit integer");
    }
    cfg.master_seed = j["master_seed"].get<std::uint64_t>();
  }

  std::string text;
  if (j.contains("dither_rule")) {
    detail::read_field(j, "dither_rule", text, "");
    if (text == "beta_over_3") cfg.dither_rule = DitherRule::beta_over_3;
    else if (text == "fixed") cfg.dither_rule = DitherRule::fixed;
    else throw ConfigError("config key 'dither_rule': unknown value '" + text + "'");
  }
  if (j.contains("dynamic_range")) {
    detail::read_field(j, "dynamic_range", text, "");
    if (text == "max_abs") cfg.dynamic_range = DynamicRangeRule::max_abs;
    else if (text == "half_peak_to_peak") cfg.dynamic_range = DynamicRangeRule::half_peak_to_peak;
    else throw ConfigError("config key 'dynamic_range': unknown value '" + text + "'");
  }
  if (j.contains("dither_calibration")) {
    detail::read_field(j, "dither_calibration", text, "");
    if (text == "clean") cfg.dither_calibration = DitherCalibration::clean;
    else if (text == "noisy") cfg.dither_calibration = DitherCalibration::noisy;
    else throw ConfigError("config key 'dither_calibration': unknown value '" + text + "'");
  }

  if (j.contains("solver")) {
    const auto& s = j["solver"];
    if (!s.is_object()) throw ConfigError("config key 'solver' must be an object");
    detail::reject_unknown(s, {"budget_epochs", "violation_tol", "trace_every"}, "solver.");
    detail::read_field(s, "budget_epochs", cfg.solver.budget_epochs, "solver.");
    detail::read_field(s, "violation_tol", cfg.solver.violation_tol, "solver.");
    if (s.contains("trace_every")) {
      if (!s["trace_every"].is_number_unsigned()) {
        throw ConfigError("config key 'solver.trace_every' must be a non-negative integer");
      }
      cfg.solver.trace_every = s["trace_every"].get<std::size_t>();
    }
  }
  validate(cfg);
  return cfg;
}

inline ExperimentConfig config_from_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return config_from_string(buffer.str());
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["n1"] = cfg.n1;
  j["n2"] = cfg.n2;
  j["rank"] = cfg.rank;
  j["lambda_grid"] = cfg.lambda_grid;
  j["m"] = cfg.m;
  j["trials"] = cfg.trials;
  j["dither_rule"] = cfg.dither_rule == DitherRule::fixed ? "fixed" : "beta_over_3";
  j["dither_sigma"] = cfg.dither_sigma;
  j["dynamic_range"] =
      cfg.dynamic_range == DynamicRangeRule::max_abs ? "max_abs" : "half_peak_to_peak";
  j["dither_calibration"] =
      cfg.dither_calibration == DitherCalibration::clean ? "clean" : "noisy";
  j["noise_std"] = cfg.noise_std;
  j["normalize_truth"] = cfg.normalize_truth;
  j["record_kappa"] = cfg.record_kappa;
  j["solver"] = {{"budget_epochs", cfg.solver.budget_epochs},
                 {"violation_tol", cfg.solver.violation_tol},
                 {"trace_every", cfg.solver.trace_every}};
  j["master_seed"] = cfg.master_seed;
  return j;
}

}  // namespace onebit
