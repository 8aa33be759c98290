#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehsim/geometry.hpp"
#include "ehsim/rng.hpp"

namespace ehsim {

enum class DeviceState { Idle = 0, Active = 1, Transmit = 2, Sleep = 3 };

inline const char* to_string(DeviceState s) {
  switch (s) {
    case DeviceState::Idle: return "S1";
    case DeviceState::Active: return "S2";
    case DeviceState::Transmit: return "S3";
    case DeviceState::Sleep: return "S4";
  }
  return "?";
}

/// ON/DRX schedule. A device is scheduled ON in TTI t when
/// (t - offset) mod drx_cycle < on_time.
struct DutyCycleConfig {
  int on_time = 1;
  int drx_cycle = 1;
  int offset = 0;

  void validate() const {
    if (on_time < 1 || drx_cycle < 1 || on_time > drx_cycle)
      throw std::invalid_argument("DutyCycleConfig: need 1 <= on_time <= drx_cycle");
    if (offset < 0 || offset >= drx_cycle)
      throw std::invalid_argument("DutyCycleConfig: need 0 <= offset < drx_cycle");
  }
  bool on_at(std::int64_t tti) const {
    std::int64_t r = (tti - offset) % drx_cycle;
    if (r < 0) r += drx_cycle;
    return r < on_time;
  }
  bool operator==(const DutyCycleConfig&) const = default;
};

struct Device {
  int id = 0;
  Position position;
  std::int64_t battery = 0;  // integer energy units, 0..e_max
  DeviceState state = DeviceState::Idle;
  DutyCycleConfig duty;
  double harvest_rate = 1.0;  // lambda_j, per-TTI
};

struct Event {
  std::int64_t tti = 0;
  Position epicenter;
  std::int64_t id = 0;
};

struct Report {
  int device_id = 0;
  std::int64_t event_id = 0;
  double information = 0.0;
};

/// p(d) = exp(-eta * d). Triggering probability decays with distance from
/// the epicenter; also scales the information a sensor can deliver.
inline double sensing_power(double d, double eta) {
  if (d < 0.0) throw std::domain_error("sensing_power: d must be >= 0");
  if (eta <= 0.0) throw std::domain_error("sensing_power: eta must be > 0");
  return std::exp(-eta * d);
}

/// I = psi * p(d), the information a device at distance d can report.
inline double event_information(double d, double eta, double psi) {
  if (psi <= 0.0) throw std::domain_error("event_information: psi must be > 0");
  return psi * sensing_power(d, eta);
}

/// Activation probability of a sensing device: the sensing power normalized
/// by the detectability floor p(d_max) and squared (received power rather
/// than amplitude), clamped to 1. Inside the sensing range d_max a sensing
/// device is always triggered; beyond it the probability decays as
/// exp(-2 eta (d - d_max)).
inline double activation_probability(double d, double eta, double d_max) {
  if (d_max <= 0.0) throw std::domain_error("activation_probability: d_max must be > 0");
  if (d < 0.0) throw std::domain_error("activation_probability: d must be >= 0");
  if (d <= d_max) return 1.0;
  return std::exp(-2.0 * eta * (d - d_max));
}

/// Best information across the reports of one event; 0 for no reports.
inline double best_information(std::span<const Report> reports) {
  double best = 0.0;
  for (const Report& r : reports) best = std::max(best, r.information);
  return best;
}

/// n devices i.i.d. uniform over the area, full batteries, state S1,
/// default duty config. Reproducible for a given (n, area, seed).
inline std::vector<Device> deploy_uniform(int n, const AreaSpec& area,
                                          std::int64_t e_max, Rng& rng) {
  if (n < 1) throw std::invalid_argument("deploy_uniform: n must be >= 1");
  area.validate();
  std::vector<Device> devices(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    devices[i].id = i;
    devices[i].position = {rng.uniform(0.0, area.width), rng.uniform(0.0, area.height)};
    devices[i].battery = e_max;
    devices[i].state = DeviceState::Idle;
  }
  return devices;
}

}  // namespace ehsim
