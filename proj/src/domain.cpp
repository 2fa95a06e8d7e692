#include "oraclesim/domain.hpp"

#include <string>

#include "oraclesim/errors.hpp"

namespace oraclesim {

std::string_view to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::Active:
      return "active";
    case NodeStatus::Provisional:
      return "provisional";
    case NodeStatus::Blacklisted:
      return "blacklisted";
  }
  return "unknown";
}

std::string_view to_string(BehaviorKind kind) {
  return kind == BehaviorKind::Honest ? "honest" : "malicious";
}

TaskView view_of(const TaskRequest& request, std::uint64_t round) {
  return TaskView{request.task_id, request.query, round, request.release_slot};
}

BehaviorProfile BehaviorProfile::honest() { return BehaviorProfile{}; }

BehaviorProfile BehaviorProfile::malicious(double misbehavior_probability) {
  BehaviorProfile p;
  p.kind = BehaviorKind::Malicious;
  p.misbehavior_probability = misbehavior_probability;
  return p;
}

InfractionLedger::InfractionLedger(std::uint32_t provisional_threshold, std::uint32_t blacklist_threshold)
    : provisional_threshold_(provisional_threshold), blacklist_threshold_(blacklist_threshold) {
  if (provisional_threshold_ >= blacklist_threshold_) {
    throw DomainError("provisional threshold must be below the blacklist threshold");
  }
}

StrikeReport InfractionLedger::record_strike(OracleNode& node) {
  if (node.status == NodeStatus::Blacklisted) {
    throw ContractViolation("record_strike on blacklisted node " + std::to_string(node.id));
  }
  StrikeReport report;
  report.node = node.id;
  report.old_status = node.status;

  ++node.strikes;
  if (node.strikes > blacklist_threshold_) {
    node.status = NodeStatus::Blacklisted;
    report.deposit_slashed = node.deposit;
    total_slashed_ += node.deposit;
    node.deposit = 0;
    provisional_.erase(node.id);
    blacklist_.insert(node.id);
  } else if (node.strikes > provisional_threshold_ && node.status == NodeStatus::Active) {
    node.status = NodeStatus::Provisional;
    provisional_.insert(node.id);
  }
  report.new_status = node.status;
  report.strikes = node.strikes;
  return report;
}

void InfractionLedger::restore(std::set<NodeId> provisional, std::set<NodeId> blacklist,
                               std::int64_t total_slashed) {
  provisional_ = std::move(provisional);
  blacklist_ = std::move(blacklist);
  total_slashed_ = total_slashed;
}

}  // namespace oraclesim
