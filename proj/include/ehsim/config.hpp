#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehsim/geometry.hpp"
#include "ehsim/policies.hpp"
#include "ehsim/wakeup.hpp"

namespace ehsim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline const char* to_string(WakeupSensing s) {
  return s == WakeupSensing::Deterministic ? "deterministic" : "bernoulli";
}
inline const char* to_string(GeometryMode g) {
  return g == GeometryMode::Oracle ? "oracle" : "estimated";
}

/// Flat simulation configuration. Field defaults are the model defaults;
/// the shipped benchmark-calibration preset overrides the free parameters the
/// source material leaves open (alpha, lambda_tau, e_h, e_max).
struct SimConfig {
  double width = 20.0;
  double height = 20.0;
  int n_devices = 50;
  double alpha = 0.05;
  double eta = 1.0;
  double psi = 1.0;
  double i_min = std::exp(-2.0);
  std::int64_t e_max = 100;
  std::int64_t e_tx = 10;
  std::int64_t e_idle = 1;
  std::int64_t e_h = 1;
  double lambda_tau = 1.0;
  double d_max = 4.0;
  int k_neighbors = 5;
  PolicyKind policy = PolicyKind::KnnCluster;
  WakeupSensing wakeup_sensing = WakeupSensing::Deterministic;
  GeometryMode geometry_mode = GeometryMode::Oracle;
  std::int64_t tti_count = 10000;
  std::int64_t burn_in = 0;  // 0 = auto: 10 x max drx cycle of the schedule
  int n_runs = 100;
  std::uint64_t base_seed = 1;

  bool operator==(const SimConfig&) const = default;

  AreaSpec area() const { return {width, height}; }
  double harvest_prob() const { return lambda_tau * std::exp(-lambda_tau); }

  /// Non-fatal findings (e.g. e_tx > e_max models an unreachable threshold).
  std::vector<std::string> validate() const {
    auto fail = [](const std::string& key, const std::string& why) {
      throw ConfigError("config: " + key + " " + why);
    };
    std::vector<std::string> warnings;
    if (width <= 0.0) fail("width", "must be > 0");
    if (height <= 0.0) fail("height", "must be > 0");
    if (n_devices < 1) fail("n_devices", "must be >= 1");
    if (alpha < 0.0 || alpha > 1.0) fail("alpha", "must be in [0,1]");
    if (eta <= 0.0) fail("eta", "must be > 0");
    if (psi <= 0.0) fail("psi", "must be > 0");
    if (i_min < 0.0) fail("i_min", "must be >= 0");
    if (i_min > psi) fail("i_min", "must be <= psi");
    if (e_max < 1) fail("e_max", "must be >= 1");
    if (e_tx < 1) fail("e_tx", "must be >= 1");
    if (e_idle < 0) fail("e_idle", "must be >= 0");
    if (e_h < 1) fail("e_h", "must be >= 1");
    if (lambda_tau <= 0.0) fail("lambda_tau", "must be > 0");
    if (d_max <= 0.0) fail("d_max", "must be > 0");
    if (k_neighbors < 1) fail("k_neighbors", "must be >= 1");
    if (tti_count < 0) fail("tti_count", "must be >= 0");
    if (burn_in < 0) fail("burn_in", "must be >= 0");
    if (n_runs < 1) fail("n_runs", "must be >= 1");
    if (e_tx > e_max)
      warnings.push_back("e_tx exceeds e_max: transmission can never occur");
    return warnings;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value, int line);

template <>
inline double parse_number<double>(const std::string& key, const std::string& value, int line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != value.size())
    throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                      "' expects a number, got '" + value + "'");
  return v;
}

template <>
inline std::int64_t parse_number<std::int64_t>(const std::string& key, const std::string& value,
                                               int line) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != value.size())
    throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                      "' expects an integer, got '" + value + "'");
  return v;
}

template <>
inline int parse_number<int>(const std::string& key, const std::string& value, int line) {
  return static_cast<int>(parse_number<std::int64_t>(key, value, line));
}

template <>
inline std::uint64_t parse_number<std::uint64_t>(const std::string& key,
                                                 const std::string& value, int line) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != value.size())
    throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                      "' expects an unsigned integer, got '" + value + "'");
  return v;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Parses the flat `key = value` format with '#' comments. Unknown keys,
/// type mismatches and invariant violations raise ConfigError carrying the
/// key name and line number. Omitted keys keep their defaults.
inline SimConfig parse_config(std::istream& in) {
  SimConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string stripped = detail::trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(stripped.substr(0, eq));
    const std::string value = detail::trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");

    using detail::parse_number;
    if (key == "width") cfg.width = parse_number<double>(key, value, line_no);
    else if (key == "height") cfg.height = parse_number<double>(key, value, line_no);
    else if (key == "n_devices") cfg.n_devices = parse_number<int>(key, value, line_no);
    else if (key == "alpha") cfg.alpha = parse_number<double>(key, value, line_no);
    else if (key == "eta") cfg.eta = parse_number<double>(key, value, line_no);
    else if (key == "psi") cfg.psi = parse_number<double>(key, value, line_no);
    else if (key == "i_min") cfg.i_min = parse_number<double>(key, value, line_no);
    else if (key == "e_max") cfg.e_max = parse_number<std::int64_t>(key, value, line_no);
    else if (key == "e_tx") cfg.e_tx = parse_number<std::int64_t>(key, value, line_no);
    else if (key == "e_idle") cfg.e_idle = parse_number<std::int64_t>(key, value, line_no);
    else if (key == "e_h") cfg.e_h = parse_number<std::int64_t>(key, value, line_no);
    else if (key == "lambda_tau") cfg.lambda_tau = parse_number<double>(key, value, line_no);
    else if (key == "d_max") cfg.d_max = parse_number<double>(key, value, line_no);
    else if (key == "k_neighbors") cfg.k_neighbors = parse_number<int>(key, value, line_no);
    else if (key == "policy") {
      try {
        cfg.policy = parse_policy(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
      }
    } else if (key == "wakeup_sensing") {
      if (value == "deterministic") cfg.wakeup_sensing = WakeupSensing::Deterministic;
      else if (value == "bernoulli") cfg.wakeup_sensing = WakeupSensing::Bernoulli;
      else
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": wakeup_sensing must be deterministic|bernoulli");
    } else if (key == "geometry_mode") {
      if (value == "oracle") cfg.geometry_mode = GeometryMode::Oracle;
      else if (value == "estimated") cfg.geometry_mode = GeometryMode::Estimated;
      else
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": geometry_mode must be oracle|estimated");
    } else if (key == "tti_count") cfg.tti_count = parse_number<std::int64_t>(key, value, line_no);
    else if (key == "burn_in") cfg.burn_in = parse_number<std::int64_t>(key, value, line_no);
    else if (key == "n_runs") cfg.n_runs = parse_number<int>(key, value, line_no);
    else if (key == "base_seed") cfg.base_seed = parse_number<std::uint64_t>(key, value, line_no);
    else
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

inline SimConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

/// Canonical serialization; parsing it back yields an identical config.
inline void serialize_config(const SimConfig& cfg, std::ostream& out) {
  using detail::format_double;
  out << "width = " << format_double(cfg.width) << "\n";
  out << "height = " << format_double(cfg.height) << "\n";
  out << "n_devices = " << cfg.n_devices << "\n";
  out << "alpha = " << format_double(cfg.alpha) << "\n";
  out << "eta = " << format_double(cfg.eta) << "\n";
  out << "psi = " << format_double(cfg.psi) << "\n";
  out << "i_min = " << format_double(cfg.i_min) << "\n";
  out << "e_max = " << cfg.e_max << "\n";
  out << "e_tx = " << cfg.e_tx << "\n";
  out << "e_idle = " << cfg.e_idle << "\n";
  out << "e_h = " << cfg.e_h << "\n";
  out << "lambda_tau = " << format_double(cfg.lambda_tau) << "\n";
  out << "d_max = " << format_double(cfg.d_max) << "\n";
  out << "k_neighbors = " << cfg.k_neighbors << "\n";
  out << "policy = " << to_string(cfg.policy) << "\n";
  out << "wakeup_sensing = " << to_string(cfg.wakeup_sensing) << "\n";
  out << "geometry_mode = " << to_string(cfg.geometry_mode) << "\n";
  out << "tti_count = " << cfg.tti_count << "\n";
  out << "burn_in = " << cfg.burn_in << "\n";
  out << "n_runs = " << cfg.n_runs << "\n";
  out << "base_seed = " << cfg.base_seed << "\n";
}

inline std::string serialize_config(const SimConfig& cfg) {
  std::ostringstream out;
  serialize_config(cfg, out);
  return out.str();
}

}  // namespace ehsim
