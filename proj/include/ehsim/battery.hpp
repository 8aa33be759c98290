#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehsim/markov.hpp"
#include "ehsim/model.hpp"
#include "ehsim/state_dynamics.hpp"

namespace ehsim {

struct IterationLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Finite battery-level chain with levels 0..e_max in 1-unit steps. Per TTI
/// the level gains `quantum` units with probability harvest_prob and loses c
/// units with probability consumption_pmf[c]; harvest and consumption are
/// independent and the result is clamped to [0, e_max].
struct BatteryChain {
  int e_max = 0;
  int quantum = 1;
  double harvest_prob = 0.0;
  std::map<int, double> consumption_pmf;
  std::vector<double> transition;  // row-major (e_max+1)^2

  int n_states() const { return e_max + 1; }
};

inline BatteryChain build_battery_chain(int e_max, int quantum, double harvest_prob,
                                        const std::map<int, double>& consumption_pmf) {
  if (e_max < 1) throw std::invalid_argument("build_battery_chain: e_max must be >= 1");
  if (quantum < 1) throw std::invalid_argument("build_battery_chain: quantum must be >= 1");
  if (harvest_prob < 0.0 || harvest_prob > 1.0)
    throw std::invalid_argument("build_battery_chain: harvest_prob must be in [0,1]");
  if (consumption_pmf.empty())
    throw std::invalid_argument("build_battery_chain: empty consumption pmf");
  double mass = 0.0;
  for (const auto& [c, q] : consumption_pmf) {
    if (c < 0 || q < 0.0)
      throw std::invalid_argument("build_battery_chain: pmf entries must be >= 0");
    mass += q;
  }
  if (std::abs(mass - 1.0) > 1e-9)
    throw std::invalid_argument("build_battery_chain: pmf sums to " + std::to_string(mass));

  BatteryChain chain{e_max, quantum, harvest_prob, consumption_pmf, {}};
  const int n = chain.n_states();
  chain.transition.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int b = 0; b < n; ++b) {
    for (int harvested = 0; harvested <= 1; ++harvested) {
      const double ph = harvested ? harvest_prob : 1.0 - harvest_prob;
      if (ph == 0.0) continue;
      for (const auto& [c, q] : consumption_pmf) {
        if (q == 0.0) continue;
        int next = b + harvested * quantum - c;
        next = std::clamp(next, 0, e_max);
        chain.transition[static_cast<std::size_t>(b) * n + next] += ph * q;
      }
    }
  }
  return chain;
}

struct BatteryDistribution {
  std::vector<double> probabilities;
};

/// Steady-state level distribution: balance equations with the normalization
/// row, solved densely. Absorbing boundaries are fine; multiple recurrent
/// classes raise DegenerateChainError naming the classes.
inline BatteryDistribution battery_stationary(const BatteryChain& chain) {
  return {stationary_distribution(chain.transition, chain.n_states())};
}

/// Pr(B >= threshold), the tail of the stationary distribution. If
/// `above_capacity` is non-null it is set when threshold exceeds the top
/// level (the returned probability is then 0: transmission can never occur).
inline double pr_battery_at_least(const BatteryDistribution& dist, int threshold,
                                  bool* above_capacity = nullptr) {
  if (threshold < 0) throw std::domain_error("pr_battery_at_least: threshold < 0");
  if (above_capacity) *above_capacity = false;
  const int n = static_cast<int>(dist.probabilities.size());
  if (threshold >= n) {
    if (above_capacity) *above_capacity = true;
    return 0.0;
  }
  double tail = 0.0;
  for (int b = threshold; b < n; ++b) tail += dist.probabilities[b];
  return tail;
}

/// Regularized incomplete beta function I_x(a, b), continued fraction with
/// the modified Lentz iteration; relative error <= 1e-12.
inline double reg_incomplete_beta(double x, double a, double b) {
  if (x < 0.0 || x > 1.0) throw std::domain_error("reg_incomplete_beta: x outside [0,1]");
  if (a <= 0.0 || b <= 0.0) throw std::domain_error("reg_incomplete_beta: a, b must be > 0");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  // the continued fraction converges fast for x < (a+1)/(a+b+2)
  if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - reg_incomplete_beta(1.0 - x, b, a);

  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front) / a;

  constexpr double tiny = 1e-300;
  double f = 1.0, c = 1.0, d = 0.0;
  for (int i = 0; i <= 600; ++i) {
    const int m = i / 2;
    double numerator;
    if (i == 0)
      numerator = 1.0;
    else if (i % 2)
      numerator = -((a + m) * (a + b + m) * x) / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
    else
      numerator = (m * (b - m) * x) / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
    d = 1.0 + numerator * d;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    c = 1.0 + numerator / c;
    if (std::abs(c) < tiny) c = tiny;
    const double cd = c * d;
    f *= cd;
    if (std::abs(1.0 - cd) < 1e-14) return front * (f - 1.0);
  }
  throw std::runtime_error("reg_incomplete_beta: continued fraction did not converge");
}

/// Closed-form references for the transmit-capability probability: the
/// binomial-style sum
///   sum_{x=e_tx}^{e_max} C(x, e_tx) p^e_tx (1-p)^(x-e_tx)
/// and the companion beta form I_{1-p}(e_tx+1, e_max+1). Neither is the
/// simulator's source of truth (the stationary solve is); both are reported
/// side by side because they disagree with each other outside narrow
/// regimes — the sum is not even bounded by 1 for large e_max.
struct SemiClosedResult {
  double binomial_sum = 0.0;
  double beta_form = 0.0;
};

inline SemiClosedResult pr_transmit_semiclosed(double p_enter, int e_tx, int e_max) {
  if (p_enter < 0.0 || p_enter > 1.0)
    throw std::domain_error("pr_transmit_semiclosed: p_enter outside [0,1]");
  if (e_tx < 1 || e_tx > e_max)
    throw std::domain_error("pr_transmit_semiclosed: need 0 < e_tx <= e_max");
  SemiClosedResult res;
  // C(x, e_tx) built up iteratively: C(e_tx, e_tx) = 1, C(x+1,k) = C(x,k)*(x+1)/(x+1-k)
  double binom = 1.0;
  const double pk = std::pow(p_enter, e_tx);
  for (int x = e_tx; x <= e_max; ++x) {
    if (x > e_tx) binom = binom * x / (x - e_tx);
    res.binomial_sum += binom * pk * std::pow(1.0 - p_enter, x - e_tx);
  }
  res.beta_form = reg_incomplete_beta(1.0 - p_enter, e_tx + 1.0, e_max + 1.0);
  return res;
}

/// Coupled state/battery fixed point: the four-state occupancy feeds the
/// consumption pmf, the battery stationary distribution feeds P_{2,3}.
/// Damped iteration until successive p_tx_capable values agree to 1e-8.
struct FixedPointResult {
  std::array<double, 4> occupancy{};
  BatteryDistribution battery;
  double p_tx_capable = 1.0;
  int iterations = 0;
};

inline FixedPointResult coupled_fixed_point(const DutyCycleConfig& duty, double alpha,
                                            const HarvestModel& harvest, int e_idle,
                                            int e_tx, int e_max, double p_detect,
                                            double p_wake = 0.0) {
  duty.validate();
  harvest.validate();
  if (e_idle < 0 || e_tx < 1 || e_max < 1)
    throw std::invalid_argument("coupled_fixed_point: bad energy parameters");
  const double ph = harvest_active_prob(harvest.lambda, harvest.tau);
  FixedPointResult res;
  double p_tx = 1.0;
  double prev = -1.0;
  for (int it = 1; it <= 1000; ++it) {
    const auto matrix = build_transition_matrix(duty, alpha, p_detect, p_wake, p_tx);
    const auto pi = state_stationary(matrix);
    std::map<int, double> pmf;
    pmf[e_idle] += pi[0] + pi[1];
    pmf[e_tx] += pi[2];
    pmf[0] += pi[3];
    const auto chain = build_battery_chain(e_max, harvest.quantum, ph, pmf);
    auto dist = battery_stationary(chain);
    double next = pr_battery_at_least(dist, e_tx);
    // oscillation (bouncing back toward the value two steps ago): average the
    // last two iterates, which preserves any fixed point
    if (prev >= 0.0 && std::abs(next - prev) < std::abs(next - p_tx))
      next = 0.5 * (next + p_tx);
    res.occupancy = pi;
    res.battery = std::move(dist);
    res.iterations = it;
    if (std::abs(next - p_tx) <= 1e-8) {
      res.p_tx_capable = next;
      return res;
    }
    prev = p_tx;
    p_tx = next;
  }
  throw IterationLimitError(
      "coupled_fixed_point: no convergence after 1000 iterations (last iterates " +
      std::to_string(prev) + ", " + std::to_string(p_tx) + ")");
}

}  // namespace ehsim
