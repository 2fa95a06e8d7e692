#pragma once

#include <cstdint>
#include <set>
#include <string_view>
#include <vector>

#include "oraclesim/crypto.hpp"

namespace oraclesim {

using NodeId = std::uint32_t;

enum class NodeStatus : std::uint8_t { Active, Provisional, Blacklisted };
enum class BehaviorKind : std::uint8_t { Honest, Malicious };

std::string_view to_string(NodeStatus status);
std::string_view to_string(BehaviorKind kind);

struct BehaviorProfile {
  BehaviorKind kind = BehaviorKind::Honest;
  // Chance that a malicious node engages in misbehavior during a round.
  double misbehavior_probability = 0.0;
  // Falsified value = truth +/- U(falsify_min, falsify_max) * tolerance.
  double falsify_min = 5.0;
  double falsify_max = 10.0;
  // Log-normal response-time parameters.
  double latency_mu = 0.0;
  double latency_sigma = 0.25;

  static BehaviorProfile honest();
  static BehaviorProfile malicious(double misbehavior_probability = 0.8);

  bool is_malicious() const noexcept { return kind == BehaviorKind::Malicious; }
};

struct OracleNode {
  NodeId id = 0;
  std::int64_t deposit = 0;
  // Rewards paid out by the payment contract; never slashed.
  std::int64_t balance = 0;
  double reputation = 100.0;
  double accumulated_reputation = 100.0;
  std::vector<double> response_times;
  // Indexed by round; tests_passed[r] <= tests_assigned[r].
  std::vector<std::uint32_t> tests_assigned;
  std::vector<std::uint32_t> tests_passed;
  // First round counted by the accuracy score; advanced at every cycle settlement.
  std::size_t accuracy_window_start = 0;
  std::uint32_t strikes = 0;
  NodeStatus status = NodeStatus::Active;
  BehaviorProfile behavior;
  // Distinct data sources this node has answered (for the diversity factor).
  std::set<std::uint32_t> sources_seen;
  Bytes vrf_secret;
  Bytes vrf_public;

  bool selectable() const noexcept { return status != NodeStatus::Blacklisted; }
};

// Query descriptor: which data source to read and which field of it.
struct Query {
  std::uint32_t source = 0;
  std::uint32_t field = 0;

  friend bool operator==(const Query&, const Query&) = default;
};

// A data request as the harness sees it. `covert` marks committee-issued test
// tasks and never reaches node behavior; nodes only ever receive a TaskView.
struct TaskRequest {
  std::uint64_t task_id = 0;
  Query query;
  bool covert = false;
  std::uint64_t release_slot = 0;
  // Test-case id for covert tasks (harness-side, like `covert`).
  std::uint64_t case_id = 0;
};

// What a node is handed. Deliberately has no covert flag or case id.
struct TaskView {
  std::uint64_t task_id = 0;
  Query query;
  std::uint64_t round = 0;
  std::uint64_t release_slot = 0;

  friend bool operator==(const TaskView&, const TaskView&) = default;
};

TaskView view_of(const TaskRequest& request, std::uint64_t round);

struct TestCase {
  std::uint64_t case_id = 0;
  Query query;
  double expected_value = 0.0;
  double tolerance = 0.0;
};

// One node's answer to one task.
struct DataReport {
  std::uint64_t task_id = 0;
  NodeId node_id = 0;
  double value = 0.0;
  double response_time = 0.0;
  std::uint64_t round = 0;
};

struct StrikeReport {
  NodeId node = 0;
  NodeStatus old_status = NodeStatus::Active;
  NodeStatus new_status = NodeStatus::Active;
  std::uint32_t strikes = 0;
  std::int64_t deposit_slashed = 0;
};

// Strike bookkeeping with a provisional registry and a permanent blacklist.
// A node moves Active -> Provisional once strikes exceed the provisional
// threshold and -> Blacklisted (deposit forfeited) once they exceed the
// blacklist threshold. Transitions never reverse within a run.
class InfractionLedger {
 public:
  InfractionLedger(std::uint32_t provisional_threshold, std::uint32_t blacklist_threshold);

  StrikeReport record_strike(OracleNode& node);

  std::uint32_t provisional_threshold() const noexcept { return provisional_threshold_; }
  std::uint32_t blacklist_threshold() const noexcept { return blacklist_threshold_; }

  bool is_provisional(NodeId id) const { return provisional_.contains(id); }
  bool is_blacklisted(NodeId id) const { return blacklist_.contains(id); }
  const std::set<NodeId>& provisional() const noexcept { return provisional_; }
  const std::set<NodeId>& blacklist() const noexcept { return blacklist_; }
  std::int64_t total_slashed() const noexcept { return total_slashed_; }

  // Restores ledger contents from a snapshot.
  void restore(std::set<NodeId> provisional, std::set<NodeId> blacklist, std::int64_t total_slashed);

 private:
  std::uint32_t provisional_threshold_;
  std::uint32_t blacklist_threshold_;
  std::set<NodeId> provisional_;
  std::set<NodeId> blacklist_;
  std::int64_t total_slashed_ = 0;
};

}  // namespace oraclesim
