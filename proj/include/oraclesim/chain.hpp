#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "oraclesim/committee.hpp"
#include "oraclesim/config.hpp"
#include "oraclesim/domain.hpp"
#include "oraclesim/reputation.hpp"
#include "oraclesim/rng.hpp"
#include "oraclesim/selection.hpp"

namespace oraclesim::chain {

// Synthetic off-chain data: every (source, field) pair has a base value and a
// bounded random-walk offset advanced once per round.
class GroundTruth {
 public:
  GroundTruth() = default;
  GroundTruth(std::uint32_t sources, std::uint32_t fields, const TaskConfig& tasks, Rng& rng);

  void advance(Rng& rng);
  double value(const Query& q) const;
  std::uint32_t sources() const noexcept { return sources_; }
  std::uint32_t fields() const noexcept { return fields_; }
  const std::vector<double>& base() const noexcept { return base_; }
  const std::vector<double>& offset() const noexcept { return offset_; }
  void restore(std::vector<double> base, std::vector<double> offset);

 private:
  std::uint32_t sources_ = 0;
  std::uint32_t fields_ = 0;
  double step_ = 0.0;
  double band_ = 0.0;
  std::vector<double> base_;
  std::vector<double> offset_;
};

struct ResponseModel {
  double tolerance = 1.0;
  // Honest noise is U(-b, b) with b = honest_noise * tolerance.
  double honest_noise = 0.5;
};

struct Response {
  DataReport report;
  // Harness-side record; never visible to verification.
  bool falsified = false;
};

// Whether a node misbehaves this round. Honest nodes never do.
bool draw_disposition(const BehaviorProfile& behavior, Rng& rng);

// The node answers `view`. `engaged` is the node's disposition; an engaged
// malicious node reports truth +/- U(falsify_min, falsify_max) * tolerance.
Response node_respond(const OracleNode& node, const TaskView& view, double truth, bool engaged,
                      const ResponseModel& model, Rng& rng);

// Single-task form: draws the disposition from the same stream first.
Response node_respond(const OracleNode& node, const TaskView& view, double truth, const ResponseModel& model,
                      Rng& rng);

struct ChainTotals {
  std::int64_t initial_deposits = 0;
  std::int64_t rewards_minted = 0;
  std::int64_t slashed = 0;
};

// Registration, payment and proxy contract state plus the infraction ledger.
class Chain {
 public:
  Chain(const ChainConfig& config, const LedgerConfig& ledger);

  NodeId register_node(std::int64_t deposit, BehaviorProfile behavior, selection::VrfKeyPair keys,
                       double initial_reputation);

  std::vector<OracleNode>& nodes() noexcept { return nodes_; }
  const std::vector<OracleNode>& nodes() const noexcept { return nodes_; }
  OracleNode& node(NodeId id);
  const OracleNode& node(NodeId id) const;
  InfractionLedger& ledger() noexcept { return ledger_; }
  const InfractionLedger& ledger() const noexcept { return ledger_; }
  const ChainConfig& config() const noexcept { return config_; }
  const ChainTotals& totals() const noexcept { return totals_; }

  // Sum of deposits of non-blacklisted nodes.
  std::int64_t locked_deposits() const;
  std::int64_t total_balances() const;
  // balances + deposits + slashed == initial deposits + minted
  bool balanced() const;

  // Proxy contract: requests dispatched this round and the responses to them.
  void open_round(std::uint64_t round);
  std::uint64_t round() const noexcept { return round_; }
  void dispatch(std::uint64_t task_id, NodeId node);
  bool dispatched(std::uint64_t task_id, NodeId node) const;
  void record_response(const DataReport& report);
  const std::vector<DataReport>& responses() const noexcept { return responses_; }

  // Payment contract.
  void pay(NodeId id, std::int64_t amount);
  std::int64_t deduct(NodeId id, double fraction);
  StrikeReport strike(NodeId id);

  void restore(std::vector<OracleNode> nodes, ChainTotals totals, std::uint64_t round);

 private:
  ChainConfig config_;
  InfractionLedger ledger_;
  std::vector<OracleNode> nodes_;
  ChainTotals totals_;
  std::uint64_t round_ = 0;
  std::set<std::pair<std::uint64_t, NodeId>> pending_;
  std::set<std::pair<std::uint64_t, NodeId>> answered_;
  std::vector<DataReport> responses_;
};

// Which parts of the incentive loop a strategy runs.
struct SettlementPolicy {
  bool penalties = true;   // strikes, punish, deposit deduction
  bool feedback = true;    // alpha weight adjustment
  bool rewards = true;     // payment per passed test
  bool reputation = true;  // recompute R and selection bases

  static SettlementPolicy for_strategy(Strategy s);
};

struct SettlementRecord {
  std::uint64_t round = 0;
  std::uint64_t passed = 0;
  std::uint64_t failed = 0;
  std::int64_t rewards_paid = 0;
  std::int64_t slashed = 0;
  std::vector<StrikeReport> strikes;
  std::vector<NodeId> blacklisted;
  std::uint64_t feedback_adjustments = 0;
  // Running totals after this settlement.
  std::int64_t initial_deposits = 0;
  std::int64_t rewards_minted = 0;
  std::int64_t deposits_remaining = 0;
  std::int64_t balances = 0;
  std::int64_t total_slashed = 0;

  bool balanced() const noexcept {
    return balances + deposits_remaining + total_slashed == initial_deposits + rewards_minted;
  }
};

struct SettlementInputs {
  std::uint64_t round = 0;
  double alpha = 0.0;
  std::uint32_t total_sources = 1;
  SettlementPolicy policy;
};

// Applies verdicts (sorted by task_id, node_id) then recomputes reputations
// and selection bases for every non-blacklisted node.
SettlementRecord settle_round(Chain& chain, selection::WeightTable& weights,
                              std::span<const committee::Verdict> verdicts, const SettlementInputs& inputs,
                              const reputation::ReputationParams& params);

// R_i for every non-blacklisted node from its current ledger entries.
void refresh_reputation(Chain& chain, std::uint64_t round, std::uint32_t total_sources,
                        const reputation::ReputationParams& params);

// Selection base = R_i / mean(R), halved while Provisional.
void refresh_weight_bases(const Chain& chain, selection::WeightTable& weights);

// Cycle end: R_acc <- R and the accuracy window restarts at `round`.
void advance_accumulated(Chain& chain, std::uint64_t round);

}  // namespace oraclesim::chain
