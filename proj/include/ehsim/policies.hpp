#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehsim/geometry.hpp"
#include "ehsim/model.hpp"
#include "ehsim/rng.hpp"

namespace ehsim {

enum class PolicyKind { Random, GridSearch, KnnCluster, Genie };

inline const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::Random: return "random";
    case PolicyKind::GridSearch: return "grid-search";
    case PolicyKind::KnnCluster: return "knn-cluster";
    case PolicyKind::Genie: return "genie";
  }
  return "?";
}

inline PolicyKind parse_policy(const std::string& s) {
  if (s == "random") return PolicyKind::Random;
  if (s == "grid-search") return PolicyKind::GridSearch;
  if (s == "knn-cluster") return PolicyKind::KnnCluster;
  if (s == "genie") return PolicyKind::Genie;
  throw std::invalid_argument("unknown policy '" + s +
                              "' (expected random|grid-search|knn-cluster|genie)");
}

/// M = ceil(area / (pi d_max^2)), at least 1.
inline int cluster_count(const AreaSpec& area, double d_max) {
  if (d_max <= 0.0) throw std::domain_error("cluster_count: d_max must be > 0");
  area.validate();
  const double m = area.area() / (M_PI * d_max * d_max);
  return std::max(1, static_cast<int>(std::ceil(m)));
}

struct Clustering {
  std::vector<int> assignment;       // device index -> cluster id, ids contiguous
  std::vector<Position> centroids;   // one per cluster id
  int k_neighbors = 5;

  int cluster_count() const { return static_cast<int>(centroids.size()); }
  std::vector<std::vector<int>> members() const {
    std::vector<std::vector<int>> out(centroids.size());
    for (std::size_t i = 0; i < assignment.size(); ++i)
      out[static_cast<std::size_t>(assignment[i])].push_back(static_cast<int>(i));
    return out;
  }
};

/// Hybrid KNN/k-means clustering: m centroids seeded from distinct device
/// positions; each round every device joins the cluster held by the majority
/// of its k nearest neighbors under the previous assignment (ties to the
/// nearest centroid), then centroids move to the cluster means. Stops when
/// the assignment is stable or after 100 rounds. Empty clusters are
/// dissolved at the end and ids compacted.
inline Clustering knn_clustering(std::span<const Position> positions, int m,
                                 int k_neighbors, Rng& rng) {
  const int n = static_cast<int>(positions.size());
  if (n == 0) throw std::invalid_argument("knn_clustering: no positions");
  if (m < 1) throw std::invalid_argument("knn_clustering: m must be >= 1");
  if (m > n) throw std::invalid_argument("knn_clustering: m exceeds device count");
  if (k_neighbors < 1) throw std::invalid_argument("knn_clustering: k_neighbors must be >= 1");
  const int k = std::min(k_neighbors, n - 1);

  // seed centroids from m distinct devices (partial Fisher-Yates)
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  for (int i = 0; i < m; ++i) {
    const int j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
    std::swap(ids[i], ids[j]);
  }
  std::vector<Position> centroids(m);
  for (int c = 0; c < m; ++c) centroids[c] = positions[ids[c]];

  // k nearest neighbors of each device (positions are fixed; compute once)
  std::vector<std::vector<int>> knn(n);
  if (k > 0) {
    std::vector<std::pair<double, int>> dist(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j)
        dist[j] = {j == i ? std::numeric_limits<double>::infinity()
                          : squared_distance(positions[i], positions[j]),
                   j};
      std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
      knn[i].reserve(k);
      for (int j = 0; j < k; ++j) knn[i].push_back(dist[j].second);
    }
  }

  auto nearest_centroid = [&](int i, std::span<const int> candidates) {
    int best = candidates.empty() ? 0 : candidates[0];
    double best_d = std::numeric_limits<double>::infinity();
    if (candidates.empty()) {
      for (int c = 0; c < m; ++c) {
        const double d = squared_distance(positions[i], centroids[c]);
        if (d < best_d) { best_d = d; best = c; }
      }
    } else {
      for (int c : candidates) {
        const double d = squared_distance(positions[i], centroids[c]);
        if (d < best_d) { best_d = d; best = c; }
      }
    }
    return best;
  };

  std::vector<int> assign(n);
  for (int i = 0; i < n; ++i) assign[i] = nearest_centroid(i, {});

  std::vector<int> counts(m), tied;
  for (int round = 0; round < 100; ++round) {
    std::vector<int> next(n);
    for (int i = 0; i < n; ++i) {
      std::fill(counts.begin(), counts.end(), 0);
      for (int j : knn[i]) ++counts[assign[j]];
      const int best = *std::max_element(counts.begin(), counts.end());
      tied.clear();
      for (int c = 0; c < m; ++c)
        if (counts[c] == best) tied.push_back(c);
      next[i] = tied.size() == 1 ? tied[0] : nearest_centroid(i, tied);
    }
    const bool stable = next == assign;
    assign = std::move(next);
    for (int c = 0; c < m; ++c) {
      double sx = 0.0, sy = 0.0;
      int cnt = 0;
      for (int i = 0; i < n; ++i)
        if (assign[i] == c) { sx += positions[i].x; sy += positions[i].y; ++cnt; }
      if (cnt > 0) centroids[c] = {sx / cnt, sy / cnt};
    }
    if (stable) break;
  }

  // dissolve empty clusters, compact ids
  std::vector<int> remap(m, -1);
  Clustering out;
  out.k_neighbors = k_neighbors;
  for (int i = 0; i < n; ++i) {
    if (remap[assign[i]] == -1) {
      remap[assign[i]] = static_cast<int>(out.centroids.size());
      out.centroids.push_back(centroids[assign[i]]);
    }
  }
  out.assignment.resize(n);
  for (int i = 0; i < n; ++i) out.assignment[i] = remap[assign[i]];
  return out;
}

/// Round-robin duty cycling inside each cluster: on_time 1, drx_cycle equal
/// to the cluster size, offsets 0..size-1 in ascending device order, so each
/// TTI has exactly one scheduled-ON member per cluster.
inline std::vector<DutyCycleConfig> round_robin_schedule(const Clustering& clustering) {
  std::vector<DutyCycleConfig> duty(clustering.assignment.size());
  for (const auto& members : clustering.members()) {
    const int size = static_cast<int>(members.size());
    int slot = 0;
    for (int device : members)  // members come out id-ordered
      duty[device] = {1, size, slot++};
  }
  return duty;
}

/// Benchmark policy: per device, on_time uniform on {1,2}, drx_cycle uniform
/// on {2,4,8}, offset uniform. The (2,2) draw is kept (always-on); analytic
/// utilities reject it, the simulator's deterministic schedule handles it.
inline std::vector<DutyCycleConfig> random_duty_policy(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("random_duty_policy: n must be >= 1");
  static constexpr int kOn[] = {1, 2};
  static constexpr int kDrx[] = {2, 4, 8};
  std::vector<DutyCycleConfig> duty(static_cast<std::size_t>(n));
  for (auto& d : duty) {
    d.on_time = kOn[rng.uniform_index(2)];
    d.drx_cycle = kDrx[rng.uniform_index(3)];
    d.offset = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(d.drx_cycle)));
  }
  return duty;
}

struct GridCandidate {
  DutyCycleConfig config;
  double mean_ec = 0.0;
  double mean_info = 0.0;
  bool feasible = false;
};

struct GridSearchResult {
  DutyCycleConfig selected;
  bool feasible = false;  // false: no pair met the constraint; selected is the
                          // best-information fallback, flagged not substituted
  std::vector<GridCandidate> report;
};

/// Exhaustive search over network-uniform (on, drx) pairs: minimize mean EC
/// subject to mean information >= i_min; exact EC ties go to the larger drx,
/// then the smaller on_time. The evaluator runs the pilot Monte Carlo.
inline GridSearchResult grid_search_duty(
    std::span<const int> candidate_on, std::span<const int> candidate_drx, double i_min,
    const std::function<std::pair<double, double>(const DutyCycleConfig&)>& evaluator) {
  if (candidate_on.empty() || candidate_drx.empty())
    throw std::invalid_argument("grid_search_duty: empty candidate sets");
  GridSearchResult res;
  bool have_best = false, have_fallback = false;
  DutyCycleConfig best{}, fallback{};
  double best_ec = 0.0, fallback_info = -1.0;
  for (int on : candidate_on) {
    for (int drx : candidate_drx) {
      if (on < 1 || drx < on) continue;
      const DutyCycleConfig cfg{on, drx, 0};
      const auto [ec, info] = evaluator(cfg);
      const bool feasible = info >= i_min;
      res.report.push_back({cfg, ec, info, feasible});
      if (feasible) {
        const bool better =
            !have_best || ec < best_ec ||
            (ec == best_ec && (drx > best.drx_cycle ||
                               (drx == best.drx_cycle && on < best.on_time)));
        if (better) { best = cfg; best_ec = ec; have_best = true; }
      }
      if (!have_fallback || info > fallback_info) {
        fallback = cfg;
        fallback_info = info;
        have_fallback = true;
      }
    }
  }
  if (res.report.empty())
    throw std::invalid_argument("grid_search_duty: candidate sets contain no valid pair");
  res.feasible = have_best;
  res.selected = have_best ? best : fallback;
  return res;
}

/// Lower-bound policy oracle: index of the device closest to the epicenter,
/// ties to the lowest id.
inline int genie_detector(const Event& event, std::span<const Device> devices) {
  if (devices.empty()) throw std::invalid_argument("genie_detector: no devices");
  int best = devices[0].id;
  double best_d = squared_distance(devices[0].position, event.epicenter);
  for (const Device& dev : devices.subspan(1)) {
    const double d = squared_distance(dev.position, event.epicenter);
    if (d < best_d || (d == best_d && dev.id < best)) {
      best_d = d;
      best = dev.id;
    }
  }
  return best;
}

}  // namespace ehsim
