#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "oraclesim/errors.hpp"
#include "oraclesim/simulation.hpp"
#include "oraclesim/trace.hpp"

namespace oraclesim {
namespace {

RunConfig small_config(std::uint64_t seed = 7) {
  RunConfig c;
  c.population = 120;
  c.feeders_per_round = 20;
  c.malicious_fraction = 0.3;
  c.rounds = 30;
  c.seed = seed;
  c.committee.cycle = 6;
  c.ledger.blacklist_threshold = 1;
  c.committee.tamper_probability = 0.3;
  c.committee.false_accusation_probability = 0.3;
  return c;
}

std::string trace_text(const RunConfig& c) {
  std::ostringstream out;
  run_simulation(c, trace::ndjson_sink(out));
  return out.str();
}

TEST(Simulation, FixedSeedIsByteIdentical) {
  const auto c = small_config();
  const auto a = trace_text(c);
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, trace_text(c));
  EXPECT_NE(a, trace_text(small_config(8)));
}

TEST(Simulation, EveryStrategyIsDeterministic) {
  for (auto s : {Strategy::DecTest, Strategy::WeightedRandom, Strategy::PureRandom, Strategy::DosLike}) {
    auto c = small_config();
    c.strategy = s;
    const auto a = run_simulation(c);
    const auto b = run_simulation(c);
    EXPECT_EQ(a.metrics, b.metrics) << to_string(s);
    EXPECT_EQ(a.metrics.size(), c.rounds);
  }
}

TEST(Simulation, AlphaDrawnFromBand) {
  auto c = small_config();
  c.alpha_band = {0.4, 0.6};
  Simulation sim(c);
  EXPECT_GE(sim.alpha(), 0.4);
  EXPECT_LE(sim.alpha(), 0.6);
}

TEST(Simulation, RefusesToRunPastTheEnd) {
  auto c = small_config();
  c.rounds = 2;
  Simulation sim(c);
  sim.run_round();
  sim.run_round();
  EXPECT_TRUE(sim.finished());
  EXPECT_THROW(sim.run_round(), ContractViolation);
}

TEST(Simulation, InvalidConfigIsRejectedUpFront) {
  auto c = small_config();
  c.malicious_fraction = 1.5;
  EXPECT_THROW(Simulation{c}, ValidationError);
}

std::vector<nlohmann::json> events_from(const std::vector<nlohmann::json>& events, std::uint64_t round) {
  std::vector<nlohmann::json> out;
  for (const auto& e : events) {
    if (e.contains("round") && e["round"].get<std::uint64_t>() >= round) out.push_back(e);
  }
  return out;
}

TEST(Snapshot, ResumeMatchesUninterruptedRun) {
  const auto c = small_config();
  std::vector<nlohmann::json> full_events;
  Simulation full(c, trace::collecting_sink(full_events));
  while (!full.finished()) full.run_round();

  for (std::uint64_t cut : {1ull, 6ull, 13ull, 29ull}) {
    Simulation first(c);
    while (first.next_round() < cut) first.run_round();
    const auto text = first.snapshot().dump();
    std::vector<nlohmann::json> tail;
    auto resumed = Simulation::from_snapshot(nlohmann::json::parse(text), trace::collecting_sink(tail));
    EXPECT_EQ(resumed.next_round(), cut);
    while (!resumed.finished()) resumed.run_round();
    EXPECT_EQ(resumed.metrics(), full.metrics()) << "cut at " << cut;
    EXPECT_EQ(resumed.snapshot(), full.snapshot()) << "cut at " << cut;
    EXPECT_EQ(tail, events_from(full_events, cut)) << "cut at " << cut;
  }
}

TEST(Snapshot, RejectsUnknownSchema) {
  Simulation sim(small_config());
  auto snap = sim.snapshot();
  snap["schema"] = 99;
  EXPECT_ANY_THROW(Simulation::from_snapshot(snap));
}

TEST(Replay, RecomputesEngineMetricsExactly) {
  for (auto s : {Strategy::DecTest, Strategy::DosLike}) {
    auto c = small_config();
    c.strategy = s;
    std::ostringstream out;
    const auto result = run_simulation(c, trace::ndjson_sink(out));
    std::istringstream in(out.str());
    EXPECT_EQ(trace::replay(in), result.metrics);
  }
}

TEST(Replay, RejectsTraceWithoutHeader) {
  std::vector<nlohmann::json> events{{{"event", "round"}, {"round", 0}}};
  EXPECT_THROW(trace::replay(events), std::runtime_error);
  std::istringstream empty("");
  EXPECT_THROW(trace::replay(empty), std::runtime_error);
}

TEST(Hygiene, AllHonestLongRunHasNoPenalties) {
  RunConfig c;
  c.population = 40;
  c.feeders_per_round = 10;
  c.committee.size = 5;
  c.malicious_fraction = 0.0;
  c.rounds = 1000;
  c.seed = 3;
  const auto result = run_simulation(c);
  for (const auto& a : result.audits) {
    ASSERT_EQ(a.penalties, 0u) << "round " << a.round;
    ASSERT_TRUE(a.balanced);
  }
  for (const auto& n : result.final_nodes) {
    EXPECT_EQ(n.strikes, 0u);
    EXPECT_EQ(n.status, NodeStatus::Active);
  }
  for (const auto& m : result.metrics) ASSERT_EQ(m.feed_accuracy.value(), 1.0);
}

TEST(Hygiene, BlacklistedNodesNeverReappear) {
  auto c = small_config();
  c.rounds = 60;
  const auto result = run_simulation(c);
  std::size_t blacklisted = 0;
  for (const auto& a : result.audits) {
    const std::set<NodeId> banned(a.blacklisted_before.begin(), a.blacklisted_before.end());
    blacklisted = std::max(blacklisted, banned.size());
    for (NodeId id : a.feeders) ASSERT_FALSE(banned.contains(id)) << "feeder " << id << " round " << a.round;
    for (NodeId id : a.committee) ASSERT_FALSE(banned.contains(id)) << "member " << id << " round " << a.round;
    for (NodeId id : a.paid) ASSERT_FALSE(banned.contains(id));
  }
  EXPECT_GT(blacklisted, 0u);
}

TEST(Hygiene, ConservationAndRoleSeparationEveryRound) {
  const auto result = run_simulation(small_config());
  for (const auto& a : result.audits) {
    ASSERT_TRUE(a.balanced) << a.round;
    ASSERT_TRUE(a.locked_matches) << a.round;
    for (NodeId m : a.committee) {
      ASSERT_EQ(std::count(a.feeders.begin(), a.feeders.end(), m), 0) << "member fed in round " << a.round;
    }
  }
  for (const auto& s : result.settlements) ASSERT_TRUE(s.balanced());
}

TEST(Hygiene, BaselinesMakeNoFeedbackAdjustments) {
  for (auto s : {Strategy::PureRandom, Strategy::DosLike, Strategy::WeightedRandom}) {
    auto c = small_config();
    c.strategy = s;
    const auto result = run_simulation(c);
    for (const auto& a : result.audits) ASSERT_EQ(a.feedback_adjustments, 0u) << to_string(s);
  }
}

TEST(Committee, OneVerdictPerCovertTest) {
  auto c = small_config();
  std::vector<nlohmann::json> events;
  run_simulation(c, trace::collecting_sink(events));
  std::map<std::uint64_t, std::set<std::pair<std::uint64_t, NodeId>>> verdicts;
  std::map<std::uint64_t, std::set<std::pair<std::uint64_t, NodeId>>> dispatched;
  for (const auto& e : events) {
    const auto kind = e["event"].get<std::string>();
    if (kind == "verdict") {
      const auto key = std::pair{e["task"].get<std::uint64_t>(), e["node"].get<NodeId>()};
      ASSERT_TRUE(verdicts[e["round"]].insert(key).second) << "duplicate verdict";
    } else if (kind == "dispatch") {
      for (const auto& n : e["nodes"]) dispatched[e["round"]].insert({e["task"].get<std::uint64_t>(), n.get<NodeId>()});
    }
  }
  for (std::uint64_t r = 0; r < c.rounds; ++r) {
    EXPECT_EQ(verdicts[r].size(), c.tests_per_round()) << "round " << r;
    for (const auto& key : verdicts[r]) EXPECT_TRUE(dispatched[r].contains(key));
  }
}

TEST(Committee, MisconductIsAdjudicated) {
  auto c = small_config();
  c.rounds = 60;
  c.committee.tamper_probability = 1.0;
  c.committee.false_accusation_probability = 1.0;
  c.malicious_fraction = 0.5;
  c.misbehavior_probability = 1.0;
  std::map<std::string, int> rulings;
  int tampers = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    c.seed = seed;
    std::vector<nlohmann::json> events;
    run_simulation(c, trace::collecting_sink(events));
    for (const auto& e : events) {
      if (e["event"] == "ruling") rulings[e["kind"].get<std::string>()] += 1;
      if (e["event"] == "tamper") ++tampers;
    }
  }
  EXPECT_GT(tampers, 0);
  EXPECT_GT(rulings["confirmed"] + rulings["refuted"], 0);
  EXPECT_EQ(rulings["rejected"], 0);
}

TEST(Metrics, FirstRoundAccuracyForLightlyMaliciousPopulation) {
  RunConfig c;
  c.malicious_fraction = 0.1;
  c.rounds = 1;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    c.seed = seed;
    const auto m = run_simulation(c).metrics.front();
    EXPECT_GE(m.feed_accuracy.value(), 0.85) << "seed " << seed;
    EXPECT_LE(m.feed_accuracy.value(), 1.0);
  }
}

}  // namespace
}  // namespace oraclesim
