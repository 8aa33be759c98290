#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "ehsim/policies.hpp"
#include "ehsim/rng.hpp"

using namespace ehsim;

TEST(ClusterCount, KnownValues) {
  EXPECT_EQ(cluster_count({20.0, 20.0}, 4.0), 8);  // ceil(400 / 16pi) = ceil(7.957)
  EXPECT_EQ(cluster_count({M_PI, 1.0}, 1.0), 1);
  EXPECT_EQ(cluster_count({10.0, 10.0}, 100.0), 1);
}

TEST(KnnClustering, SingleCluster) {
  Rng rng(3);
  std::vector<Position> pos{{1, 1}, {2, 5}, {8, 3}, {4, 4}};
  const auto clustering = knn_clustering(pos, 1, 3, rng);
  EXPECT_EQ(clustering.cluster_count(), 1);
  for (int a : clustering.assignment) EXPECT_EQ(a, 0);
  EXPECT_NEAR(clustering.centroids[0].x, (1 + 2 + 8 + 4) / 4.0, 1e-12);
  EXPECT_NEAR(clustering.centroids[0].y, (1 + 5 + 3 + 4) / 4.0, 1e-12);
}

TEST(KnnClustering, SeparatedGroupsStayApart) {
  // two tight groups far apart; brute-force check that every intra-group
  // distance is below every inter-group distance, which forces the majority
  // vote to keep the groups whole
  std::vector<Position> pos;
  Rng gen(9);
  for (int i = 0; i < 5; ++i) pos.push_back({gen.uniform(0.0, 1.0), gen.uniform(0.0, 1.0)});
  for (int i = 0; i < 5; ++i) pos.push_back({18.0 + gen.uniform(0.0, 1.0), 18.0 + gen.uniform(0.0, 1.0)});
  double max_intra = 0.0, min_inter = 1e9;
  for (int i = 0; i < 10; ++i)
    for (int j = i + 1; j < 10; ++j) {
      const double d = distance(pos[i], pos[j]);
      if ((i < 5) == (j < 5)) max_intra = std::max(max_intra, d);
      else min_inter = std::min(min_inter, d);
    }
  ASSERT_LT(max_intra, min_inter);

  Rng rng(4);
  const auto clustering = knn_clustering(pos, 2, 3, rng);
  ASSERT_EQ(clustering.cluster_count(), 2);
  for (int i = 1; i < 5; ++i) EXPECT_EQ(clustering.assignment[i], clustering.assignment[0]);
  for (int i = 6; i < 10; ++i) EXPECT_EQ(clustering.assignment[i], clustering.assignment[5]);
  EXPECT_NE(clustering.assignment[0], clustering.assignment[5]);
}

TEST(KnnClustering, DeterministicBySeed) {
  Rng gen(77);
  std::vector<Position> pos;
  for (int i = 0; i < 40; ++i) pos.push_back({gen.uniform(0.0, 20.0), gen.uniform(0.0, 20.0)});
  Rng a(123), b(123);
  const auto c1 = knn_clustering(pos, 8, 5, a);
  const auto c2 = knn_clustering(pos, 8, 5, b);
  EXPECT_EQ(c1.assignment, c2.assignment);
  ASSERT_EQ(c1.centroids.size(), c2.centroids.size());
}

TEST(KnnClustering, PartitionAndErrors) {
  Rng gen(5);
  std::vector<Position> pos;
  for (int i = 0; i < 30; ++i) pos.push_back({gen.uniform(0.0, 20.0), gen.uniform(0.0, 20.0)});
  Rng rng(6);
  const auto c = knn_clustering(pos, 8, 5, rng);
  std::vector<int> sizes(c.cluster_count(), 0);
  for (int a : c.assignment) {
    ASSERT_GE(a, 0);
    ASSERT_LT(a, c.cluster_count());
    ++sizes[a];
  }
  for (int s : sizes) EXPECT_GT(s, 0);  // ids contiguous, no empty cluster
  EXPECT_THROW(knn_clustering(pos, 31, 5, rng), std::invalid_argument);
}

TEST(RoundRobin, DegenerateAndSmall) {
  Clustering c;
  c.assignment = {0};
  c.centroids = {{1.0, 1.0}};
  auto duty = round_robin_schedule(c);
  EXPECT_EQ(duty[0], (DutyCycleConfig{1, 1, 0}));

  c.assignment = {0, 0, 0, 0};
  auto duty4 = round_robin_schedule(c);
  std::set<int> offsets;
  for (const auto& d : duty4) {
    EXPECT_EQ(d.on_time, 1);
    EXPECT_EQ(d.drx_cycle, 4);
    offsets.insert(d.offset);
  }
  EXPECT_EQ(offsets, (std::set<int>{0, 1, 2, 3}));
}

TEST(RoundRobin, ExactlyOneOnPerClusterPerTti) {
  Rng gen(8);
  std::vector<Position> pos;
  for (int i = 0; i < 60; ++i) pos.push_back({gen.uniform(0.0, 20.0), gen.uniform(0.0, 20.0)});
  Rng rng(11);
  const auto clustering = knn_clustering(pos, 8, 5, rng);
  const auto duty = round_robin_schedule(clustering);
  const auto members = clustering.members();
  for (const auto& cluster : members) {
    const int cycle = static_cast<int>(cluster.size());
    for (int t = 0; t < cycle; ++t) {
      int on = 0;
      for (int device : cluster) on += duty[device].on_at(t);
      EXPECT_EQ(on, 1);
    }
  }
}

TEST(RandomDuty, ReproducibleAndValid) {
  Rng a(55), b(55);
  const auto d1 = random_duty_policy(100, a);
  const auto d2 = random_duty_policy(100, b);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(d1[i], d2[i]);
    EXPECT_NO_THROW(d1[i].validate());
    EXPECT_LE(d1[i].on_time, d1[i].drx_cycle);
  }
}

TEST(RandomDuty, PairFrequencies) {
  // all six (on, drx) pairs are emitted, including always-on (2,2),
  // each with probability 1/6
  Rng rng(101);
  const int n = 100000;
  const auto duty = random_duty_policy(n, rng);
  std::map<std::pair<int, int>, int> counts;
  for (const auto& d : duty) ++counts[{d.on_time, d.drx_cycle}];
  EXPECT_EQ(counts.size(), 6u);
  const double p = 1.0 / 6.0;
  const double sigma = std::sqrt(p * (1 - p) / n);
  for (const auto& [pair, count] : counts)
    EXPECT_NEAR(static_cast<double>(count) / n, p, 3.0 * sigma);
}

TEST(GridSearch, SelectionRules) {
  const int on_set[] = {1, 2};
  const int drx_set[] = {2, 4};
  // deterministic evaluator: ec = on/drx, info high for drx <= 4
  auto eval = [](const DutyCycleConfig& d) {
    return std::pair<double, double>{static_cast<double>(d.on_time) / d.drx_cycle, 0.5};
  };
  const auto res = grid_search_duty(on_set, drx_set, 0.2, eval);
  EXPECT_TRUE(res.feasible);
  EXPECT_EQ(res.selected.on_time, 1);
  EXPECT_EQ(res.selected.drx_cycle, 4);
  EXPECT_EQ(res.report.size(), 4u);  // (1,2),(1,4),(2,2),(2,4)

  // no feasible pair: flagged fallback carries the best-information pair
  auto infeasible = [](const DutyCycleConfig& d) {
    return std::pair<double, double>{1.0, d.drx_cycle == 2 ? 0.10 : 0.05};
  };
  const auto fb = grid_search_duty(on_set, drx_set, 0.2, infeasible);
  EXPECT_FALSE(fb.feasible);
  EXPECT_EQ(fb.selected.drx_cycle, 2);
}

TEST(GridSearch, MatchesBruteForceReplay) {
  const int on_set[] = {1, 2};
  const int drx_set[] = {2, 4, 8};
  auto eval = [](const DutyCycleConfig& d) {
    const double ec = 0.3 * d.on_time + 1.0 / d.drx_cycle;
    const double info = 0.05 * d.drx_cycle;
    return std::pair<double, double>{ec, info};
  };
  const auto res = grid_search_duty(on_set, drx_set, 0.2, eval);
  // independent replay over all valid pairs
  double best_ec = 1e18;
  DutyCycleConfig best{};
  for (int on : on_set)
    for (int drx : drx_set) {
      if (on > drx) continue;
      const auto [ec, info] = eval({on, drx, 0});
      if (info >= 0.2 && ec < best_ec) {
        best_ec = ec;
        best = {on, drx, 0};
      }
    }
  EXPECT_TRUE(res.feasible);
  EXPECT_EQ(res.selected.on_time, best.on_time);
  EXPECT_EQ(res.selected.drx_cycle, best.drx_cycle);
}

TEST(GenieDetector, NearestAndTies) {
  std::vector<Device> devices(3);
  devices[0] = {0, {0.0, 0.0}, 10, DeviceState::Sleep, {}, 1.0};
  devices[1] = {1, {4.0, 0.0}, 10, DeviceState::Sleep, {}, 1.0};
  devices[2] = {2, {2.0, 7.0}, 10, DeviceState::Sleep, {}, 1.0};
  EXPECT_EQ(genie_detector({0, {4.0, 0.0}, 0}, devices), 1);
  EXPECT_EQ(genie_detector({0, {2.0, 0.0}, 0}, devices), 0);  // tie 0 vs 1 -> lower id
}

TEST(GenieDetector, MatchesLinearScanOracle) {
  Rng rng(202);
  std::vector<Device> devices(40);
  for (int i = 0; i < 40; ++i)
    devices[i] = {i, {rng.uniform(0.0, 20.0), rng.uniform(0.0, 20.0)}, 0,
                  DeviceState::Sleep, {}, 1.0};
  for (int trial = 0; trial < 100; ++trial) {
    const Event ev{trial, {rng.uniform(0.0, 20.0), rng.uniform(0.0, 20.0)}, trial};
    int best = -1;
    double best_d = 1e300;
    for (const auto& d : devices) {
      const double dist2 = squared_distance(d.position, ev.epicenter);
      if (dist2 < best_d) {
        best_d = dist2;
        best = d.id;
      }
    }
    EXPECT_EQ(genie_detector(ev, devices), best);
  }
  // permutation invariance up to the tie rule
  auto shuffled = devices;
  std::reverse(shuffled.begin(), shuffled.end());
  for (int trial = 0; trial < 20; ++trial) {
    const Event ev{trial, {rng.uniform(0.0, 20.0), rng.uniform(0.0, 20.0)}, trial};
    EXPECT_EQ(genie_detector(ev, devices), genie_detector(ev, shuffled));
  }
}
