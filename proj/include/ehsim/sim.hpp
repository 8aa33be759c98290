#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ehsim/config.hpp"
#include "ehsim/model.hpp"
#include "ehsim/policies.hpp"
#include "ehsim/rng.hpp"
#include "ehsim/wakeup.hpp"

namespace ehsim {

/// Policy data resolved ahead of a run. The grid-search pair comes from the
/// pilot search (experiment layer); the other policies draw their schedules
/// inside the world from the run's own stream.
struct PolicyPlan {
  PolicyKind kind = PolicyKind::KnnCluster;
  DutyCycleConfig uniform_duty{1, 2, 0};  // grid-search: selected (on, drx)
};

struct TtiLog {
  std::int64_t tti = 0;
  std::optional<Event> event;
  std::vector<Report> detections;
  WakeupDecision woken;
  std::int64_t energy_spent = 0;
  std::array<int, 4> states_census{};
  double final_information = 0.0;
};

struct RunMetrics {
  double misdetection_prob = 0.0;
  double mean_ec = 0.0;
  double mean_info = 0.0;
  std::int64_t events_total = 0;
  std::int64_t events_missed = 0;
  std::int64_t tti_count = 0;
  std::uint64_t seed = 0;
  bool has_misdetection = false;  // false when no event occurred (0/0)
  bool has_info = false;          // false when alpha * K == 0
  bool ledger_ok = false;         // exact per-device energy conservation
};

/// Mutable per-run state. Owns the devices, their schedules and the exact
/// integer energy ledger; one world per run, single writer.
class World final : public EnergyLedger {
 public:
  World(const SimConfig& cfg, const PolicyPlan& plan, std::uint64_t seed)
      : cfg_(&cfg), plan_(plan), rng_(seed), seed_(seed) {
    cfg.validate();
    devices_ = deploy_uniform(cfg.n_devices, cfg.area(), cfg.e_max, rng_);
    for (auto& d : devices_) d.harvest_rate = cfg.lambda_tau;
    switch (plan_.kind) {
      case PolicyKind::KnnCluster: {
        std::vector<Position> pos(devices_.size());
        for (std::size_t i = 0; i < devices_.size(); ++i) pos[i] = devices_[i].position;
        const int m = std::min(cluster_count(cfg.area(), cfg.d_max),
                               static_cast<int>(devices_.size()));
        clustering_ = knn_clustering(pos, m, cfg.k_neighbors, rng_);
        const auto duty = round_robin_schedule(clustering_);
        for (std::size_t i = 0; i < devices_.size(); ++i) devices_[i].duty = duty[i];
        break;
      }
      case PolicyKind::Random: {
        const auto duty = random_duty_policy(cfg.n_devices, rng_);
        for (std::size_t i = 0; i < devices_.size(); ++i) devices_[i].duty = duty[i];
        break;
      }
      case PolicyKind::GridSearch: {
        for (auto& d : devices_) {
          d.duty = plan_.uniform_duty;
          d.duty.offset = static_cast<int>(
              rng_.uniform_index(static_cast<std::uint64_t>(plan_.uniform_duty.drx_cycle)));
        }
        break;
      }
      case PolicyKind::Genie:
        for (auto& d : devices_) d.state = DeviceState::Sleep;
        break;
    }
    ledger_.resize(devices_.size());
    for (std::size_t i = 0; i < devices_.size(); ++i) ledger_[i].initial = devices_[i].battery;
    harvest_prob_ = cfg.harvest_prob();
    p_threshold_ = sensing_power(cfg.d_max, cfg.eta);
    clock_ = 0;
  }

  // EnergyLedger
  std::int64_t battery(int device_id) const override {
    return devices_[static_cast<std::size_t>(device_id)].battery;
  }
  void charge(int device_id, std::int64_t amount) override {
    auto& dev = devices_[static_cast<std::size_t>(device_id)];
    assert(dev.battery >= amount);
    dev.battery -= amount;
    ledger_[static_cast<std::size_t>(device_id)].spent += amount;
    tti_spent_ += amount;
  }

  std::int64_t clock() const { return clock_; }
  void set_clock(std::int64_t tti) { clock_ = tti; }
  const std::vector<Device>& devices() const { return devices_; }
  const Clustering& clustering() const { return clustering_; }

  /// One TTI in order: harvest, schedule, event draw, detection,
  /// transmission, wake-up, census. Events resolve within their TTI.
  TtiLog step_tti() {
    const SimConfig& cfg = *cfg_;
    TtiLog log;
    log.tti = clock_;
    tti_spent_ = 0;

    // (1) harvest
    for (auto& dev : devices_) {
      if (rng_.bernoulli(harvest_prob_)) {
        auto& entry = ledger_[static_cast<std::size_t>(dev.id)];
        entry.harvested += cfg.e_h;
        const std::int64_t overflow = std::max<std::int64_t>(0, dev.battery + cfg.e_h - cfg.e_max);
        entry.clamp_loss += overflow;
        dev.battery = std::min(dev.battery + cfg.e_h, cfg.e_max);
      }
    }

    // (2) schedule + idle upkeep; a scheduled-ON device that cannot pay
    // E_idle fails the sensing action with its battery drained.
    sensing_.assign(devices_.size(), 0);
    if (plan_.kind == PolicyKind::Genie) {
      for (auto& dev : devices_) dev.state = DeviceState::Sleep;
    } else {
      for (auto& dev : devices_) {
        if (dev.duty.on_at(clock_)) {
          if (dev.battery >= cfg.e_idle) {
            charge(dev.id, cfg.e_idle);
            dev.state = DeviceState::Idle;
            sensing_[static_cast<std::size_t>(dev.id)] = 1;
          } else {
            drain(dev.id);
            dev.state = DeviceState::Sleep;
          }
        } else {
          dev.state = DeviceState::Sleep;
        }
      }
    }

    // (3) event draw
    if (rng_.bernoulli(cfg.alpha)) {
      log.event = Event{clock_, {rng_.uniform(0.0, cfg.width), rng_.uniform(0.0, cfg.height)},
                        next_event_id_++};
    }

    if (log.event) {
      const Event& event = *log.event;
      if (plan_.kind == PolicyKind::Genie) {
        // The BS activates the closest device only, and only when its battery
        // covers the full activation; it tracks battery levels and skips
        // devices that could not deliver.
        const int chosen = genie_detector(event, devices_);
        auto& dev = devices_[static_cast<std::size_t>(chosen)];
        if (dev.battery >= cfg.e_idle + cfg.e_tx) {
          charge(chosen, cfg.e_idle + cfg.e_tx);
          dev.state = DeviceState::Transmit;
          const double d = distance(dev.position, event.epicenter);
          log.detections.push_back({chosen, event.id, event_information(d, cfg.eta, cfg.psi)});
        }
      } else {
        // (4) detection: Bernoulli activation with the range-normalized
        // sensing power; (5) transmission for activated devices that can pay.
        for (auto& dev : devices_) {
          if (!sensing_[static_cast<std::size_t>(dev.id)]) continue;
          const double d = distance(dev.position, event.epicenter);
          if (!rng_.bernoulli(activation_probability(d, cfg.eta, cfg.d_max))) continue;
          dev.state = DeviceState::Active;
          if (dev.battery >= cfg.e_tx) {
            charge(dev.id, cfg.e_tx);
            dev.state = DeviceState::Transmit;
            log.detections.push_back({dev.id, event.id, event_information(d, cfg.eta, cfg.psi)});
          } else {
            drain(dev.id);
            dev.state = DeviceState::Sleep;
          }
        }
        // (6) wake-up: the cluster-based policy may rescue an event no
        // report reached the BS for; see README for how this relates to the
        // reported-event round.
        const double initial_info = best_information(log.detections);
        if (plan_.kind == PolicyKind::KnnCluster && log.detections.empty()) {
          sleepers_.clear();
          for (const auto& dev : devices_)
            if (dev.state == DeviceState::Sleep) sleepers_.push_back(dev);
          WakeupParams params{cfg.i_min,  p_threshold_,        cfg.psi,
                              cfg.eta,    static_cast<int>(cfg.e_idle),
                              static_cast<int>(cfg.e_tx),      cfg.geometry_mode,
                              cfg.wakeup_sensing,              cfg.d_max};
          log.woken = wakeup_round(event, log.detections, sleepers_, devices_, params,
                                   *this, rng_);
          for (std::size_t w = 0; w < log.woken.woken.size(); ++w)
            devices_[static_cast<std::size_t>(log.woken.woken[w])].state =
                log.woken.woken_delivered[w] ? DeviceState::Transmit : DeviceState::Sleep;
          log.final_information = log.woken.final_information;
        } else {
          log.final_information = initial_info;
        }
      }
      if (plan_.kind == PolicyKind::Genie)
        log.final_information = best_information(log.detections);
    }

    for (const auto& dev : devices_)
      ++log.states_census[static_cast<std::size_t>(dev.state)];
    log.energy_spent = tti_spent_;
    ++clock_;
    return log;
  }

  /// Exact conservation: initial + harvested - spent - clamp_loss == final.
  bool ledger_consistent() const {
    for (std::size_t i = 0; i < devices_.size(); ++i) {
      const auto& e = ledger_[i];
      if (e.initial + e.harvested - e.spent - e.clamp_loss != devices_[i].battery) return false;
    }
    return true;
  }

  std::int64_t total_harvested() const {
    std::int64_t t = 0;
    for (const auto& e : ledger_) t += e.harvested;
    return t;
  }

 private:
  struct LedgerEntry {
    std::int64_t initial = 0, harvested = 0, spent = 0, clamp_loss = 0;
  };

  void drain(int device_id) {
    auto& dev = devices_[static_cast<std::size_t>(device_id)];
    ledger_[static_cast<std::size_t>(device_id)].spent += dev.battery;
    tti_spent_ += dev.battery;
    dev.battery = 0;
  }

  const SimConfig* cfg_;
  PolicyPlan plan_;
  std::vector<Device> devices_;
  std::vector<LedgerEntry> ledger_;
  std::vector<char> sensing_;
  std::vector<Device> sleepers_;
  Clustering clustering_;
  Rng rng_;
  std::uint64_t seed_;
  double harvest_prob_ = 0.0;
  double p_threshold_ = 0.0;
  std::int64_t clock_ = 0;
  std::int64_t tti_spent_ = 0;
  std::int64_t next_event_id_ = 0;
};

/// Mean energy units consumed per device per TTI over metered logs.
inline double mean_energy_consumption(std::span<const TtiLog> logs, int n_devices) {
  if (logs.empty() || n_devices < 1)
    throw std::invalid_argument("mean_energy_consumption: empty logs");
  std::int64_t spent = 0;
  for (const TtiLog& log : logs) spent += log.energy_spent;
  return static_cast<double>(spent) /
         (static_cast<double>(n_devices) * static_cast<double>(logs.size()));
}

/// Sum of final event information normalized by the expected event count
/// alpha * k (the realized count is not observable at the BS).
inline double mean_information_per_event(std::span<const TtiLog> logs, double alpha,
                                         std::int64_t k) {
  if (alpha * static_cast<double>(k) <= 0.0)
    throw std::invalid_argument("mean_information_per_event: alpha * k must be positive");
  double info = 0.0;
  for (const TtiLog& log : logs)
    if (log.event) info += log.final_information;
  return info / (alpha * static_cast<double>(k));
}

/// Share of events that delivered no information at all.
inline double misdetection_probability(std::span<const TtiLog> logs) {
  std::int64_t events = 0, missed = 0;
  for (const TtiLog& log : logs) {
    if (!log.event) continue;
    ++events;
    if (log.final_information <= 0.0) ++missed;
  }
  if (events == 0) throw std::invalid_argument("misdetection_probability: no events");
  return static_cast<double>(missed) / static_cast<double>(events);
}

/// Runs burn-in plus tti_count metered TTIs and aggregates the metrics.
/// burn_in == 0 in the config selects the automatic window of 10 x the
/// largest DRX cycle in the schedule.
inline RunMetrics run_simulation(const SimConfig& cfg, const PolicyPlan& plan,
                                 std::uint64_t seed,
                                 const std::function<void(const TtiLog&)>& trace = {}) {
  World world(cfg, plan, seed);
  std::int64_t burn = cfg.burn_in;
  if (burn == 0) {
    std::int64_t max_drx = 1;
    for (const auto& dev : world.devices()) max_drx = std::max<std::int64_t>(max_drx, dev.duty.drx_cycle);
    burn = 10 * max_drx;
  }
  world.set_clock(-burn);

  RunMetrics metrics;
  metrics.seed = seed;
  metrics.tti_count = cfg.tti_count;
  std::int64_t spent_metered = 0;
  double info_sum = 0.0;
  for (std::int64_t t = -burn; t < cfg.tti_count; ++t) {
    const TtiLog log = world.step_tti();
    if (log.tti < 0) continue;
    spent_metered += log.energy_spent;
    if (log.event) {
      ++metrics.events_total;
      info_sum += log.final_information;
      if (log.final_information <= 0.0) ++metrics.events_missed;
    }
    if (trace) trace(log);
  }
  metrics.has_misdetection = metrics.events_total > 0;
  if (metrics.has_misdetection)
    metrics.misdetection_prob =
        static_cast<double>(metrics.events_missed) / static_cast<double>(metrics.events_total);
  metrics.mean_ec = cfg.tti_count > 0
                        ? static_cast<double>(spent_metered) /
                              (static_cast<double>(cfg.n_devices) * static_cast<double>(cfg.tti_count))
                        : 0.0;
  const double expected_events = cfg.alpha * static_cast<double>(cfg.tti_count);
  metrics.has_info = expected_events > 0.0;
  if (metrics.has_info) metrics.mean_info = info_sum / expected_events;
  metrics.ledger_ok = world.ledger_consistent();
  return metrics;
}

}  // namespace ehsim
