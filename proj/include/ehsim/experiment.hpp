#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ehsim/config.hpp"
#include "ehsim/sim.hpp"

namespace ehsim {

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;
  double ci95 = 0.0;  // half-width, normal approximation
};

struct Aggregate {
  MetricSummary misdetection;
  MetricSummary mean_ec;
  MetricSummary mean_info;
  int n_runs = 0;
  std::uint64_t base_seed = 0;
  bool ledger_ok = true;
  std::vector<RunMetrics> runs;
};

namespace detail {

inline MetricSummary summarize(const std::vector<double>& xs) {
  MetricSummary s;
  const std::size_t n = xs.size();
  if (n == 0) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(n - 1));
    s.ci95 = 1.96 * s.stddev / std::sqrt(static_cast<double>(n));
  }
  return s;
}

}  // namespace detail

/// n_runs independent simulations with seeds split deterministically from
/// base_seed; a fresh uniform deployment per run. The worker count never
/// changes the result: run i always uses seed split(base_seed, i) and the
/// aggregation is an order-independent fold over the run index.
inline Aggregate run_experiment(const SimConfig& cfg, const PolicyPlan& plan, int n_runs,
                                std::uint64_t base_seed, int parallelism = 1) {
  if (n_runs < 1) throw std::invalid_argument("run_experiment: n_runs must be >= 1");
  if (parallelism < 1) parallelism = 1;
  std::vector<RunMetrics> runs(static_cast<std::size_t>(n_runs));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_runs) return;
      runs[static_cast<std::size_t>(i)] =
          run_simulation(cfg, plan, Rng::split(base_seed, static_cast<std::uint64_t>(i)));
    }
  };
  const int threads = std::min(parallelism, n_runs);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  Aggregate agg;
  agg.n_runs = n_runs;
  agg.base_seed = base_seed;
  std::vector<double> miss, ec, info;
  miss.reserve(runs.size());
  ec.reserve(runs.size());
  info.reserve(runs.size());
  for (const RunMetrics& r : runs) {
    if (r.has_misdetection) miss.push_back(r.misdetection_prob);
    ec.push_back(r.mean_ec);
    if (r.has_info) info.push_back(r.mean_info);
    agg.ledger_ok = agg.ledger_ok && r.ledger_ok;
  }
  agg.misdetection = detail::summarize(miss);
  agg.mean_ec = detail::summarize(ec);
  agg.mean_info = detail::summarize(info);
  agg.runs = std::move(runs);
  return agg;
}

/// Resolves a policy into a concrete plan. For the grid search this runs the
/// pilot Monte Carlo over every valid network-uniform (on, drx) pair from
/// the benchmark ranges and picks the cheapest pair meeting the information
/// constraint (flagged fallback otherwise). Pilot runs are shorter and
/// seeded from a dedicated stream so the main runs stay untouched.
struct ResolvedPolicy {
  PolicyPlan plan;
  bool grid_feasible = true;
  std::vector<GridCandidate> grid_report;
};

inline ResolvedPolicy resolve_policy(const SimConfig& cfg, std::uint64_t base_seed,
                                     int parallelism = 1) {
  ResolvedPolicy res;
  res.plan.kind = cfg.policy;
  if (cfg.policy != PolicyKind::GridSearch) return res;

  SimConfig pilot = cfg;
  pilot.policy = PolicyKind::GridSearch;
  pilot.n_runs = std::max(2, cfg.n_runs / 10);
  pilot.tti_count = std::max<std::int64_t>(500, cfg.tti_count / 5);
  pilot.burn_in = cfg.burn_in;

  static constexpr int kOn[] = {1, 2};
  static constexpr int kDrx[] = {2, 4, 8};
  int pair_index = 0;
  const auto evaluator = [&](const DutyCycleConfig& duty) {
    PolicyPlan plan{PolicyKind::GridSearch, duty};
    const std::uint64_t seed =
        Rng::split(base_seed ^ 0x9D11075EA3C0ULL, static_cast<std::uint64_t>(pair_index++));
    const Aggregate agg = run_experiment(pilot, plan, pilot.n_runs, seed, parallelism);
    return std::pair<double, double>{agg.mean_ec.mean, agg.mean_info.mean};
  };
  const GridSearchResult grid = grid_search_duty(kOn, kDrx, cfg.i_min, evaluator);
  res.plan.uniform_duty = grid.selected;
  res.grid_feasible = grid.feasible;
  res.grid_report = grid.report;
  return res;
}

struct SweepRow {
  PolicyKind policy;
  int n_devices = 0;
  MetricSummary misdetection, mean_ec, mean_info;
  int n_runs = 0;
  std::uint64_t base_seed = 0;
  bool ledger_ok = true;
  bool grid_feasible = true;          // false: best-information fallback pair
  DutyCycleConfig grid_selected{};    // grid-search rows only
};

/// One experiment per (policy, density); densities vary the deployment size,
/// everything else comes from the config. Rows appear in policy-major order
/// matching the given lists.
inline std::vector<SweepRow> sweep(const SimConfig& base, const std::vector<int>& densities,
                                   const std::vector<PolicyKind>& policies,
                                   int parallelism = 1) {
  if (densities.empty()) throw std::invalid_argument("sweep: empty density list");
  if (policies.empty()) throw std::invalid_argument("sweep: empty policy list");
  std::vector<SweepRow> rows;
  rows.reserve(densities.size() * policies.size());
  for (PolicyKind policy : policies) {
    for (int n : densities) {
      SimConfig cfg = base;
      cfg.policy = policy;
      cfg.n_devices = n;
      cfg.validate();
      const ResolvedPolicy resolved = resolve_policy(cfg, base.base_seed, parallelism);
      const Aggregate agg =
          run_experiment(cfg, resolved.plan, cfg.n_runs, base.base_seed, parallelism);
      rows.push_back({policy, n, agg.misdetection, agg.mean_ec, agg.mean_info, agg.n_runs,
                      agg.base_seed, agg.ledger_ok, resolved.grid_feasible,
                      resolved.plan.uniform_duty});
    }
  }
  return rows;
}

}  // namespace ehsim
