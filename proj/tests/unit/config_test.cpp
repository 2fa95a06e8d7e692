#include <gtest/gtest.h>

#include <algorithm>

#include "oraclesim/config.hpp"
#include "oraclesim/errors.hpp"

namespace oraclesim {
namespace {

bool mentions(const ValidationError& e, const std::string& needle) {
  return std::any_of(e.problems().begin(), e.problems().end(),
                     [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

TEST(Config, DefaultsAreValid) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.tests_per_round(), c.feeders_per_round);
  EXPECT_EQ(c.alpha_band.label(), "0.01-0.05");
}

TEST(Config, UnknownKeyNamesDottedPath) {
  try {
    parse_config_text("committee:\n  sise: 5\nfoo: 1\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_TRUE(mentions(e, "unknown key: committee.sise"));
    EXPECT_TRUE(mentions(e, "unknown key: foo"));
  }
}

TEST(Config, OutOfRangeFractionNamesField) {
  auto c = parse_config_text("malicious_fraction: 1.5\n");
  try {
    c.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_TRUE(mentions(e, "malicious_fraction"));
  }
}

TEST(Config, CollectsEveryProblem) {
  auto c = parse_config_text("malicious_fraction: -1\ncommittee:\n  size: 2\nledger:\n  provisional_threshold: 5\n  blacklist_threshold: 5\n");
  try {
    c.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_TRUE(mentions(e, "malicious_fraction"));
    EXPECT_TRUE(mentions(e, "committee.size"));
    EXPECT_TRUE(mentions(e, "ledger"));
    EXPECT_GE(e.problems().size(), 3u);
  }
}

TEST(Config, IllTypedValueIsValidationError) {
  EXPECT_THROW(parse_config_text("rounds: many\n"), ValidationError);
  EXPECT_THROW(parse_config_text("strategy: best\n"), ValidationError);
  EXPECT_THROW(parse_config_text("committee: 4\n"), ValidationError);
  EXPECT_THROW(parse_config_text("- a\n- b\n"), ValidationError);
  EXPECT_THROW(parse_config_text("rounds: [\n"), ValidationError);
}

TEST(Config, PopulationMustHoldCommitteeAndFeeders) {
  RunConfig c;
  c.population = 56;
  c.feeders_per_round = 50;
  try {
    c.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_TRUE(mentions(e, "population"));
  }
  c.population = 57;
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, YamlRoundTrip) {
  RunConfig c;
  c.population = 321;
  c.malicious_fraction = 0.1 + 0.2;  // not representable exactly in decimal
  c.strategy = Strategy::DosLike;
  c.alpha_band = {0.4, 0.6};
  c.committee.reset_feedback = false;
  c.reputation.rt_orientation = reputation::RtOrientation::Inverted;
  c.tasks.source_weights = {1, 2.5, 3};
  c.output.run_id = "a \"quoted\" id";
  const auto text = to_yaml(c);
  const auto back = parse_config_text(text);
  EXPECT_EQ(to_yaml(back), text);
  EXPECT_EQ(back.malicious_fraction, c.malicious_fraction);
  EXPECT_EQ(back.output.run_id, c.output.run_id);
  EXPECT_FALSE(back.committee.reset_feedback);
}

TEST(Config, OverridesApplyOnTopOfFile) {
  auto c = parse_config_text("rounds: 10\nseed: 3\n");
  apply_overrides(c, {"rounds=25", "committee.cycle=4", "alpha_band=0.1-0.3", "strategy=pure_random"});
  EXPECT_EQ(c.rounds, 25u);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.committee.cycle, 4u);
  EXPECT_EQ(c.alpha_band.lo, 0.1);
  EXPECT_EQ(c.strategy, Strategy::PureRandom);
  EXPECT_THROW(apply_overrides(c, {"nope=1"}), ValidationError);
  EXPECT_THROW(apply_overrides(c, {"rounds"}), ValidationError);
}

TEST(Config, StrategyNamesRoundTrip) {
  for (auto s : {Strategy::DecTest, Strategy::WeightedRandom, Strategy::PureRandom, Strategy::DosLike}) {
    EXPECT_EQ(strategy_from_string(to_string(s)), s);
  }
  EXPECT_FALSE(strategy_from_string("greedy").has_value());
}

}  // namespace
}  // namespace oraclesim
