#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehsim/geometry.hpp"
#include "ehsim/markov.hpp"
#include "ehsim/model.hpp"

namespace ehsim {

struct ModelInconsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-TTI energy-source activity model: the source delivers at most one
/// energy arrival per TTI, active with probability lambda*tau*exp(-lambda*tau).
struct HarvestModel {
  double lambda = 1.0;   // 1/mu_j, per TTI
  double tau = 1.0;      // TTI duration
  int quantum = 1;       // units harvested per active TTI (e_h)

  void validate() const {
    if (lambda <= 0.0 || tau <= 0.0)
      throw std::domain_error("HarvestModel: lambda and tau must be > 0");
    if (quantum < 1) throw std::domain_error("HarvestModel: quantum must be >= 1");
  }
};

inline double harvest_active_prob(double lambda, double tau) {
  if (lambda <= 0.0 || tau <= 0.0)
    throw std::domain_error("harvest_active_prob: lambda and tau must be > 0");
  const double x = lambda * tau;
  return x * std::exp(-x);
}

/// P_{4,1} = on_time / drx_cycle.
inline double p_sleep_to_idle(const DutyCycleConfig& duty) {
  duty.validate();
  return static_cast<double>(duty.on_time) / static_cast<double>(duty.drx_cycle);
}

/// P_{1,1} = sum_{i=1}^{on} (1-alpha)^i (on-i)/(drx-i). Requires drx > on;
/// drx == on hits a zero denominator at i = on and is rejected.
inline double p_idle_self(const DutyCycleConfig& duty, double alpha) {
  duty.validate();
  if (alpha < 0.0 || alpha > 1.0)
    throw std::domain_error("p_idle_self: alpha must be in [0,1]");
  double sum = 0.0;
  for (int i = 1; i <= duty.on_time; ++i) {
    const int denom = duty.drx_cycle - i;
    if (denom == 0)
      throw std::domain_error(
          "p_idle_self: drx_cycle == " + std::to_string(i) +
          " makes summand " + std::to_string(i) +
          " divide by zero (drx_cycle must exceed on_time)");
    sum += std::pow(1.0 - alpha, i) * static_cast<double>(duty.on_time - i) / denom;
  }
  return sum;
}

/// P_{3,1} = sum_{i=1}^{on} (on-i)/(drx-i). Same domain restriction as
/// p_idle_self.
inline double p_tx_to_idle(const DutyCycleConfig& duty) {
  duty.validate();
  double sum = 0.0;
  for (int i = 1; i <= duty.on_time; ++i) {
    const int denom = duty.drx_cycle - i;
    if (denom == 0)
      throw std::domain_error(
          "p_tx_to_idle: drx_cycle == " + std::to_string(i) +
          " makes summand " + std::to_string(i) +
          " divide by zero (drx_cycle must exceed on_time)");
    sum += static_cast<double>(duty.on_time - i) / denom;
  }
  return sum;
}

/// 4x4 transition matrix over (S1, S2, S3, S4), row-stochastic.
struct StateTransitionMatrix {
  std::array<double, 16> p{};

  double& at(int m, int n) { return p[static_cast<std::size_t>(m) * 4 + n]; }
  double at(int m, int n) const { return p[static_cast<std::size_t>(m) * 4 + n]; }
  std::vector<double> as_vector() const { return {p.begin(), p.end()}; }
};

/// Assembles the analytic four-state chain. p_detect is the event-conditional
/// activation probability at the analysis-reference distance (network-wide
/// spatial average by default, see average_activation); p_wake is P_{4,2};
/// p_tx_capable is Pr(B >= E_Tx) from the battery analysis.
inline StateTransitionMatrix build_transition_matrix(const DutyCycleConfig& duty,
                                                     double alpha, double p_detect,
                                                     double p_wake,
                                                     double p_tx_capable) {
  for (auto [v, name] : {std::pair{alpha, "alpha"}, {p_detect, "p_detect"},
                         {p_wake, "p_wake"}, {p_tx_capable, "p_tx_capable"}}) {
    if (v < 0.0 || v > 1.0)
      throw std::domain_error(std::string("build_transition_matrix: ") + name +
                              " must be in [0,1]");
  }
  StateTransitionMatrix m;
  auto check = [](double v, int r, int c) {
    if (v < -1e-12 || v > 1.0 + 1e-12)
      throw ModelInconsistencyError("transition P(" + std::to_string(r + 1) + "," +
                                    std::to_string(c + 1) + ") = " + std::to_string(v) +
                                    " outside [0,1]");
    return std::clamp(v, 0.0, 1.0);
  };
  const double p11 = p_idle_self(duty, alpha);
  const double p12 = alpha * p_detect;
  const double p14 = 1.0 - p11 - p12;
  const double p31 = p_tx_to_idle(duty);
  const double p41 = p_sleep_to_idle(duty);
  m.at(0, 0) = check(p11, 0, 0);
  m.at(0, 1) = check(p12, 0, 1);
  m.at(0, 3) = check(p14, 0, 3);
  m.at(1, 2) = check(p_tx_capable, 1, 2);
  m.at(1, 3) = check(1.0 - p_tx_capable, 1, 3);
  m.at(2, 0) = check(p31, 2, 0);
  m.at(2, 3) = check(1.0 - p31, 2, 3);
  m.at(3, 0) = check(p41, 3, 0);
  m.at(3, 1) = check(p_wake, 3, 1);
  m.at(3, 3) = check(1.0 - p41 - p_wake, 3, 3);
  return m;
}

/// Stationary occupancy of the four-state chain.
inline std::array<double, 4> state_stationary(const StateTransitionMatrix& m) {
  const auto pi = stationary_distribution(m.as_vector(), 4);
  return {pi[0], pi[1], pi[2], pi[3]};
}

/// Spatial average of activation_probability(d) over a uniform device and a
/// uniform epicenter in the area, evaluated with the rectangle
/// difference-coordinate density and composite Simpson quadrature refined
/// until successive grids agree to 1e-6.
inline double average_activation(const AreaSpec& area, double eta, double d_max) {
  area.validate();
  const double w = area.width, h = area.height;
  auto integrate = [&](int n) {
    // f(x, y) = a(sqrt(x^2+y^2)) * 4 (w-x)(h-y) / (w^2 h^2), x in [0,w], y in [0,h]
    const double hx = w / n, hy = h / n;
    double total = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double x = i * hx;
      const double wx = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      double row = 0.0;
      for (int j = 0; j <= n; ++j) {
        const double y = j * hy;
        const double wy = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        const double d = std::sqrt(x * x + y * y);
        const double f = activation_probability(d, eta, d_max) * 4.0 * (w - x) * (h - y) /
                         (w * w * h * h);
        row += wy * f;
      }
      total += wx * row;
    }
    return total * hx * hy / 9.0;
  };
  double prev = integrate(128);
  for (int n = 256; n <= 4096; n *= 2) {
    const double cur = integrate(n);
    if (std::abs(cur - prev) < 1e-6) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace ehsim
