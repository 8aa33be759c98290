#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ehsim/geometry.hpp"
#include "ehsim/model.hpp"
#include "ehsim/rng.hpp"

namespace ehsim {

struct NumericInconsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Inverts I = psi p(d): the BS recovers the reporter's distance from the
/// information it delivered.
inline double estimate_reporter_distance(double information, double psi, double eta) {
  if (psi <= 0.0 || eta <= 0.0)
    throw std::domain_error("estimate_reporter_distance: psi, eta must be > 0");
  if (information <= 0.0 || information > psi)
    throw std::domain_error("estimate_reporter_distance: information outside (0, psi]");
  return -std::log(information / psi) / eta;
}

/// Pr(S3_j | S3_h) via the law of cosines: exp(-eta sqrt(d_h^2 + d_jh^2 -
/// 2 d_h d_jh cos phi)). Equals sensing_power of the reconstructed
/// device-to-epicenter distance.
inline double conditional_report_prob(double d_h, double d_jh, double phi, double eta) {
  if (d_h < 0.0 || d_jh < 0.0)
    throw std::domain_error("conditional_report_prob: distances must be >= 0");
  if (eta <= 0.0) throw std::domain_error("conditional_report_prob: eta must be > 0");
  double radicand = d_h * d_h + d_jh * d_jh - 2.0 * d_h * d_jh * std::cos(phi);
  if (radicand < 0.0) {
    if (radicand < -1e-12)
      throw NumericInconsistencyError("conditional_report_prob: radicand " +
                                      std::to_string(radicand));
    radicand = 0.0;
  }
  return std::exp(-eta * std::sqrt(radicand));
}

/// Conditional report probability averaged over an unknown bearing phi,
/// uniform on [0, 2pi), 1024-point midpoint rule. Used by the `estimated`
/// geometry mode where the BS does not know the epicenter.
inline double conditional_report_prob_phi_avg(double d_h, double d_jh, double eta) {
  constexpr int kPoints = 1024;
  double sum = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double phi = (i + 0.5) * (2.0 * M_PI / kPoints);
    sum += conditional_report_prob(d_h, d_jh, phi, eta);
  }
  return sum / kPoints;
}

enum class GeometryMode { Oracle, Estimated };
enum class WakeupSensing { Deterministic, Bernoulli };

/// Battery mutations during a wake-up round flow through this interface so
/// the owning world keeps its conservation ledger exact.
class EnergyLedger {
 public:
  virtual ~EnergyLedger() = default;
  virtual std::int64_t battery(int device_id) const = 0;
  virtual void charge(int device_id, std::int64_t amount) = 0;
};

struct WakeupCandidate {
  int device_id = 0;
  double conditional_prob = 0.0;
};

struct WakeupDecision {
  std::vector<WakeupCandidate> ranked;  // score-descending candidate list
  double threshold = 0.0;
  std::vector<int> woken;
  std::vector<char> woken_delivered;  // aligned with woken
  double final_information = 0.0;
};

struct WakeupParams {
  double i_min = 0.0;
  double p_threshold = 0.0;  // p(d_max) per the activation rule of the round
  double psi = 1.0;
  double eta = 1.0;
  int e_idle = 1;
  int e_tx = 10;
  GeometryMode geometry = GeometryMode::Oracle;
  WakeupSensing sensing = WakeupSensing::Deterministic;
  double d_max = 4.0;  // used by Bernoulli re-sensing
};

/// One BS wake-up round for an event. Computes the current best information
/// from the reports; if it already meets i_min nothing is woken. Otherwise
/// sleeping devices are scored by their conditional report probability
/// (maximum over reporters via the cosine rule in oracle mode, equal to the
/// sensing power at the true device-epicenter distance; phi-averaged in
/// estimated mode), filtered by the threshold and by battery sufficient for
/// the full activation (E_idle + E_Tx; the BS tracks battery levels and does
/// not prompt devices that could not deliver), and activated in score order
/// until the information target is met or candidates run out.
///
/// When the report set is empty the round degrades to the cluster-based
/// rescue: in oracle mode candidates are scored directly against the
/// epicenter; in estimated mode there is no anchor and nothing is woken.
inline WakeupDecision wakeup_round(const Event& event, std::span<const Report> reporters,
                                   std::span<const Device> sleepers,
                                   const std::vector<Device>& devices,
                                   const WakeupParams& params, EnergyLedger& ledger,
                                   Rng& rng) {
  WakeupDecision decision;
  decision.threshold = params.p_threshold;
  decision.final_information = best_information(reporters);
  if (decision.final_information >= params.i_min) return decision;
  if (reporters.empty() && params.geometry == GeometryMode::Estimated) return decision;

  std::vector<double> reporter_distances;  // estimated mode only
  if (params.geometry == GeometryMode::Estimated) {
    reporter_distances.reserve(reporters.size());
    for (const Report& r : reporters)
      reporter_distances.push_back(
          estimate_reporter_distance(r.information, params.psi, params.eta));
  }

  for (const Device& s : sleepers) {
    if (s.battery < params.e_idle + params.e_tx) continue;
    double score = 0.0;
    if (params.geometry == GeometryMode::Oracle) {
      if (reporters.empty()) {
        score = sensing_power(distance(s.position, event.epicenter), params.eta);
      } else {
        for (const Report& r : reporters) {
          const Device& h = devices[static_cast<std::size_t>(r.device_id)];
          const double d_h = distance(h.position, event.epicenter);
          const double d_jh = distance(s.position, h.position);
          // bearing between the epicenter and device j as seen from h
          double phi = 0.0;
          if (d_h > 0.0 && d_jh > 0.0) {
            const double dot = (event.epicenter.x - h.position.x) * (s.position.x - h.position.x) +
                               (event.epicenter.y - h.position.y) * (s.position.y - h.position.y);
            phi = std::acos(std::clamp(dot / (d_h * d_jh), -1.0, 1.0));
          }
          score = std::max(score, conditional_report_prob(d_h, d_jh, phi, params.eta));
        }
      }
    } else {
      for (std::size_t h = 0; h < reporters.size(); ++h) {
        const Device& hd = devices[static_cast<std::size_t>(reporters[h].device_id)];
        const double d_jh = distance(s.position, hd.position);
        score = std::max(score, conditional_report_prob_phi_avg(reporter_distances[h], d_jh,
                                                                params.eta));
      }
    }
    if (score >= params.p_threshold)
      decision.ranked.push_back({s.id, score});
  }
  std::sort(decision.ranked.begin(), decision.ranked.end(), [](const auto& a, const auto& b) {
    if (a.conditional_prob != b.conditional_prob) return a.conditional_prob > b.conditional_prob;
    return a.device_id < b.device_id;
  });

  for (const WakeupCandidate& cand : decision.ranked) {
    if (decision.final_information >= params.i_min) break;
    const Device& dev = devices[static_cast<std::size_t>(cand.device_id)];
    ledger.charge(cand.device_id, params.e_idle);
    decision.woken.push_back(cand.device_id);
    decision.woken_delivered.push_back(0);
    const double d = distance(dev.position, event.epicenter);
    bool sensed = true;
    if (params.sensing == WakeupSensing::Bernoulli)
      sensed = rng.bernoulli(activation_probability(d, params.eta, params.d_max));
    if (!sensed) continue;
    if (ledger.battery(cand.device_id) >= params.e_tx) {
      ledger.charge(cand.device_id, params.e_tx);
      decision.final_information =
          std::max(decision.final_information, event_information(d, params.eta, params.psi));
      decision.woken_delivered.back() = 1;
    }
  }
  return decision;
}

}  // namespace ehsim
