#include <gtest/gtest.h>

#include <cmath>

#include "ehsim/model.hpp"

using namespace ehsim;

TEST(SensingPower, KnownValues) {
  EXPECT_DOUBLE_EQ(sensing_power(0.0, 1.0), 1.0);
  EXPECT_NEAR(sensing_power(2.0, 1.0), std::exp(-2.0), 1e-15);
  // p(d_max) = 0.018 at d_max = 4 m
  EXPECT_NEAR(sensing_power(4.0, 1.0), 0.0183, 2e-4);
}

TEST(SensingPower, DomainErrors) {
  EXPECT_THROW(sensing_power(-0.1, 1.0), std::domain_error);
  EXPECT_THROW(sensing_power(1.0, 0.0), std::domain_error);
  EXPECT_THROW(sensing_power(1.0, -1.0), std::domain_error);
}

TEST(SensingPower, MultiplicativeAndMonotone) {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double eta = rng.uniform(0.1, 3.0);
    const double d1 = rng.uniform(0.0, 10.0);
    const double d2 = rng.uniform(0.0, 10.0);
    EXPECT_NEAR(sensing_power(d1 + d2, eta), sensing_power(d1, eta) * sensing_power(d2, eta),
                1e-12);
    EXPECT_LE(sensing_power(std::max(d1, d2), eta), sensing_power(std::min(d1, d2), eta));
  }
}

TEST(EventInformation, KnownValues) {
  EXPECT_DOUBLE_EQ(event_information(0.0, 1.0, 1.0), 1.0);
  EXPECT_NEAR(event_information(2.0, 1.0, 1.0), std::exp(-2.0), 1e-15);
  EXPECT_NEAR(event_information(1.0, 1.0, 2.0), 2.0 * std::exp(-1.0), 1e-12);
  EXPECT_THROW(event_information(1.0, 1.0, 0.0), std::domain_error);
}

TEST(ActivationProbability, RangeAndTail) {
  EXPECT_DOUBLE_EQ(activation_probability(0.0, 1.0, 4.0), 1.0);
  EXPECT_DOUBLE_EQ(activation_probability(4.0, 1.0, 4.0), 1.0);
  EXPECT_NEAR(activation_probability(5.0, 1.0, 4.0), std::exp(-2.0), 1e-15);
  Rng rng(3);
  double prev = 1.0;
  for (double d = 0.0; d <= 12.0; d += 0.25) {
    const double a = activation_probability(d, 1.0, 4.0);
    EXPECT_LE(a, prev + 1e-15);
    prev = a;
  }
}

TEST(BestInformation, MaxSemantics) {
  EXPECT_DOUBLE_EQ(best_information({}), 0.0);
  std::vector<Report> one{{0, 0, 0.3}};
  EXPECT_DOUBLE_EQ(best_information(one), 0.3);
  std::vector<Report> three{{0, 0, 0.1}, {1, 0, 0.5}, {2, 0, 0.2}};
  EXPECT_DOUBLE_EQ(best_information(three), 0.5);
}

TEST(BestInformation, MonotoneUnderUnion) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Report> a, b;
    for (int i = 0; i < 5; ++i) a.push_back({i, 0, rng.uniform()});
    for (int i = 0; i < 5; ++i) b.push_back({i + 5, 0, rng.uniform()});
    std::vector<Report> both = a;
    both.insert(both.end(), b.begin(), b.end());
    const double ia = best_information(a), ib = best_information(b);
    EXPECT_DOUBLE_EQ(best_information(both), std::max(ia, ib));
    EXPECT_GE(best_information(both), ia);
  }
}

TEST(DeployUniform, DeterministicBySeed) {
  const AreaSpec area{20.0, 20.0};
  Rng a(7), b(7);
  const auto d1 = deploy_uniform(10, area, 100, a);
  const auto d2 = deploy_uniform(10, area, 100, b);
  ASSERT_EQ(d1.size(), d2.size());
  for (std::size_t i = 0; i < d1.size(); ++i) {
    EXPECT_DOUBLE_EQ(d1[i].position.x, d2[i].position.x);
    EXPECT_DOUBLE_EQ(d1[i].position.y, d2[i].position.y);
    EXPECT_EQ(d1[i].battery, 100);
    EXPECT_EQ(d1[i].state, DeviceState::Idle);
  }
}

TEST(DeployUniform, BoundsAndCount) {
  const AreaSpec area{20.0, 20.0};
  Rng rng(42);
  const auto devices = deploy_uniform(250, area, 50, rng);
  ASSERT_EQ(devices.size(), 250u);
  for (const auto& d : devices) EXPECT_TRUE(area.contains(d.position));
}

TEST(DeployUniform, MeanWithinThreeSigma) {
  // mean of 10^4 uniforms on [0,20]: sd = 20/sqrt(12)/100
  const AreaSpec area{20.0, 20.0};
  Rng rng(1234);
  const auto devices = deploy_uniform(10000, area, 1, rng);
  double sum = 0.0;
  for (const auto& d : devices) sum += d.position.x;
  const double mean = sum / 10000.0;
  const double sigma = 20.0 / std::sqrt(12.0) / 100.0;
  EXPECT_NEAR(mean, 10.0, 3.0 * sigma);
}

TEST(DeployUniform, RejectsZero) {
  const AreaSpec area{20.0, 20.0};
  Rng rng(1);
  EXPECT_THROW(deploy_uniform(0, area, 1, rng), std::invalid_argument);
}

TEST(DutyCycle, OnWindowSemantics) {
  const DutyCycleConfig duty{1, 4, 2};
  duty.validate();
  int on_count = 0;
  for (int t = 0; t < 8; ++t) on_count += duty.on_at(t);
  EXPECT_EQ(on_count, 2);
  EXPECT_TRUE(duty.on_at(2));
  EXPECT_TRUE(duty.on_at(6));
  EXPECT_TRUE(duty.on_at(-2));  // negative clocks during burn-in
  EXPECT_THROW((DutyCycleConfig{3, 2, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((DutyCycleConfig{1, 4, 4}.validate()), std::invalid_argument);
}
