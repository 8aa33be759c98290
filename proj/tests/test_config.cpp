#include <gtest/gtest.h>

#include <cmath>

#include "ehsim/config.hpp"

using namespace ehsim;

TEST(Config, DefaultsFromEmptyDocument) {
  const SimConfig cfg = parse_config(std::string{});
  EXPECT_DOUBLE_EQ(cfg.width, 20.0);
  EXPECT_DOUBLE_EQ(cfg.height, 20.0);
  EXPECT_DOUBLE_EQ(cfg.alpha, 0.05);
  EXPECT_DOUBLE_EQ(cfg.eta, 1.0);
  EXPECT_DOUBLE_EQ(cfg.psi, 1.0);
  EXPECT_DOUBLE_EQ(cfg.i_min, std::exp(-2.0));
  EXPECT_EQ(cfg.e_tx, 10);
  EXPECT_EQ(cfg.e_idle, 1);
  EXPECT_EQ(cfg.e_max, 100);
  EXPECT_DOUBLE_EQ(cfg.d_max, 4.0);
  EXPECT_EQ(cfg.k_neighbors, 5);
  EXPECT_EQ(cfg.policy, PolicyKind::KnnCluster);
}

TEST(Config, BenchmarkValuesAccepted) {
  const SimConfig cfg = parse_config(
      "e_tx = 10\n"
      "e_idle = 1\n"
      "eta = 1\n"
      "d_max = 4\n");
  EXPECT_EQ(cfg.e_tx, 10);
  EXPECT_EQ(cfg.e_idle, 1);
  EXPECT_DOUBLE_EQ(cfg.eta, 1.0);
  EXPECT_DOUBLE_EQ(cfg.d_max, 4.0);
}

TEST(Config, ValidationNamesTheKey) {
  try {
    parse_config("alpha = 1.5\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("alpha"), std::string::npos);
    EXPECT_NE(msg.find("[0,1]"), std::string::npos);
  }
}

TEST(Config, UnknownKeyRejectedWithLine) {
  try {
    parse_config("alpha = 0.1\nnot_a_key = 3\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("not_a_key"), std::string::npos);
    EXPECT_NE(msg.find("line 2"), std::string::npos);
  }
}

TEST(Config, TypeMismatchRejected) {
  EXPECT_THROW(parse_config("alpha = fast\n"), ConfigError);
  EXPECT_THROW(parse_config("n_devices = 3.5\n"), ConfigError);
  EXPECT_THROW(parse_config("policy = sometimes\n"), ConfigError);
  EXPECT_THROW(parse_config("alpha\n"), ConfigError);
}

TEST(Config, CommentsAndWhitespace) {
  const SimConfig cfg = parse_config(
      "# leading comment\n"
      "\n"
      "  alpha = 0.25   # trailing comment\n"
      "policy = genie\n");
  EXPECT_DOUBLE_EQ(cfg.alpha, 0.25);
  EXPECT_EQ(cfg.policy, PolicyKind::Genie);
}

TEST(Config, RoundTripIdentity) {
  SimConfig cfg;
  cfg.alpha = 0.37;
  cfg.lambda_tau = 0.18;
  cfg.e_h = 3;
  cfg.e_max = 400;
  cfg.i_min = std::exp(-2.0);
  cfg.policy = PolicyKind::GridSearch;
  cfg.wakeup_sensing = WakeupSensing::Bernoulli;
  cfg.geometry_mode = GeometryMode::Estimated;
  cfg.base_seed = 0xDEADBEEFULL;
  const SimConfig back = parse_config(serialize_config(cfg));
  EXPECT_EQ(cfg, back);
  EXPECT_EQ(serialize_config(cfg), serialize_config(back));
}

TEST(Config, TxAboveCapacityIsWarningNotError) {
  const SimConfig cfg = parse_config("e_tx = 120\ne_max = 100\n");
  const auto warnings = cfg.validate();
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("e_tx"), std::string::npos);
}

TEST(Config, InvariantViolations) {
  EXPECT_THROW(parse_config("i_min = 2\npsi = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("n_devices = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("lambda_tau = 0\n"), ConfigError);
}
