#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "json.hpp"
#include "oraclesim/chain.hpp"
#include "oraclesim/committee.hpp"
#include "oraclesim/config.hpp"
#include "oraclesim/metrics.hpp"
#include "oraclesim/selection.hpp"

namespace oraclesim {

// Receives one structured trace event at a time.
using TraceSink = std::function<void(const nlohmann::json&)>;

inline constexpr int kTraceSchemaVersion = 1;
inline constexpr int kSnapshotSchemaVersion = 1;

// Per-round record of who did what; used by the hygiene checks.
struct RoundAudit {
  std::uint64_t round = 0;
  std::vector<NodeId> feeders;
  std::vector<NodeId> committee;
  std::vector<NodeId> paid;
  // Blacklist as it stood when the round began.
  std::vector<NodeId> blacklisted_before;
  std::uint64_t penalties = 0;  // strikes + refuted-accuser punishments
  std::uint64_t feedback_adjustments = 0;
  bool balanced = true;
  bool locked_matches = true;
};

struct SimulationResult {
  RunConfig config;
  double alpha = 0.0;
  std::vector<metrics::RoundMetrics> metrics;
  std::vector<OracleNode> final_nodes;
  std::vector<RoundAudit> audits;
  std::vector<chain::SettlementRecord> settlements;
};

class Simulation {
 public:
  explicit Simulation(RunConfig config, TraceSink trace = {});

  // Executes the next round and returns its metrics.
  metrics::RoundMetrics run_round();
  std::uint64_t next_round() const noexcept { return next_round_; }
  bool finished() const noexcept { return next_round_ >= config_.rounds; }

  const RunConfig& config() const noexcept { return config_; }
  double alpha() const noexcept { return alpha_; }
  const chain::Chain& chain() const noexcept { return chain_; }
  const selection::WeightTable& weights() const noexcept { return weights_; }
  const committee::CommitteeState& committee() const noexcept { return committee_; }
  const chain::GroundTruth& truth() const noexcept { return truth_; }
  const std::vector<metrics::RoundMetrics>& metrics() const noexcept { return metrics_; }
  const std::vector<RoundAudit>& audits() const noexcept { return audits_; }

  SimulationResult result() const;

  // Full state; from_snapshot(snapshot()) continues exactly where this left off.
  nlohmann::json snapshot() const;
  static Simulation from_snapshot(const nlohmann::json& snapshot, TraceSink trace = {});

 private:
  struct Restore {};
  Simulation(Restore, RunConfig config, TraceSink trace);

  void emit(const nlohmann::json& event) const;
  std::vector<selection::CommitteeCandidate> committee_candidates(std::span<const NodeId> exclude) const;
  void elect_or_rotate(std::uint64_t round, const Digest& seed);
  void refill_committee(std::uint64_t round, const Digest& seed, std::span<const NodeId> feeders);

  RunConfig config_;
  TraceSink trace_;
  double alpha_ = 0.0;
  chain::Chain chain_;
  selection::WeightTable weights_;
  chain::GroundTruth truth_;
  committee::TaskMix mix_;
  committee::CommitteeState committee_;
  chain::SettlementPolicy policy_;
  std::uint64_t next_round_ = 0;
  std::vector<metrics::RoundMetrics> metrics_;
  std::vector<RoundAudit> audits_;
  std::vector<chain::SettlementRecord> settlements_;
};

SimulationResult run_simulation(const RunConfig& config, TraceSink trace = {});

}  // namespace oraclesim
