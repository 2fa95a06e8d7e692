#include "oraclesim/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "oraclesim/errors.hpp"

namespace oraclesim::chain {

GroundTruth::GroundTruth(std::uint32_t sources, std::uint32_t fields, const TaskConfig& tasks, Rng& rng)
    : sources_(sources), fields_(fields), step_(tasks.truth_step), band_(tasks.truth_band) {
  if (sources_ == 0 || fields_ == 0) throw DomainError("ground truth needs at least one source and field");
  const std::size_t n = static_cast<std::size_t>(sources_) * fields_;
  base_.resize(n);
  offset_.assign(n, 0.0);
  for (auto& b : base_) b = uniform(rng, tasks.truth_min, tasks.truth_max);
}

void GroundTruth::advance(Rng& rng) {
  for (auto& o : offset_) {
    o = std::clamp(o + uniform(rng, -step_, step_), -band_, band_);
  }
}

double GroundTruth::value(const Query& q) const {
  if (q.source >= sources_ || q.field >= fields_) {
    throw LookupError("no data source " + std::to_string(q.source) + "." + std::to_string(q.field));
  }
  const std::size_t k = static_cast<std::size_t>(q.source) * fields_ + q.field;
  return base_[k] + offset_[k];
}

void GroundTruth::restore(std::vector<double> base, std::vector<double> offset) {
  if (base.size() != offset.size() || base.size() != static_cast<std::size_t>(sources_) * fields_) {
    throw DomainError("ground truth snapshot does not match the source catalog");
  }
  base_ = std::move(base);
  offset_ = std::move(offset);
}

bool draw_disposition(const BehaviorProfile& behavior, Rng& rng) {
  if (!behavior.is_malicious()) return false;
  return bernoulli(rng, behavior.misbehavior_probability);
}

Response node_respond(const OracleNode& node, const TaskView& view, double truth, bool engaged,
                      const ResponseModel& model, Rng& rng) {
  if (node.status == NodeStatus::Blacklisted) {
    throw ContractViolation("blacklisted node " + std::to_string(node.id) + " cannot respond");
  }
  // Fixed draw order regardless of branch keeps per-node streams aligned.
  const double noise_u = uniform01(rng);
  const double magnitude_u = uniform01(rng);
  const bool negative = bernoulli(rng, 0.5);
  const double latency = lognormal(rng, node.behavior.latency_mu, node.behavior.latency_sigma);

  Response out;
  out.report.task_id = view.task_id;
  out.report.node_id = node.id;
  out.report.round = view.round;
  out.report.response_time = latency;
  const bool falsify = engaged && node.behavior.is_malicious();
  if (falsify) {
    const double span = node.behavior.falsify_max - node.behavior.falsify_min;
    const double offset = (node.behavior.falsify_min + span * magnitude_u) * model.tolerance;
    out.report.value = truth + (negative ? -offset : offset);
  } else {
    const double bound = model.honest_noise * model.tolerance;
    out.report.value = truth + bound * (2.0 * noise_u - 1.0);
  }
  out.falsified = falsify;
  return out;
}

Response node_respond(const OracleNode& node, const TaskView& view, double truth, const ResponseModel& model,
                      Rng& rng) {
  const bool engaged = draw_disposition(node.behavior, rng);
  return node_respond(node, view, truth, engaged, model, rng);
}

Chain::Chain(const ChainConfig& config, const LedgerConfig& ledger)
    : config_(config), ledger_(ledger.provisional_threshold, ledger.blacklist_threshold) {}

NodeId Chain::register_node(std::int64_t deposit, BehaviorProfile behavior, selection::VrfKeyPair keys,
                            double initial_reputation) {
  if (deposit < config_.minimum_deposit) {
    throw ContractViolation("deposit " + std::to_string(deposit) + " below minimum " +
                            std::to_string(config_.minimum_deposit));
  }
  if (!(initial_reputation > 0.0)) throw DomainError("initial reputation must be positive");
  OracleNode node;
  node.id = static_cast<NodeId>(nodes_.size());
  node.deposit = deposit;
  node.reputation = initial_reputation;
  node.accumulated_reputation = initial_reputation;
  node.behavior = behavior;
  node.vrf_secret = std::move(keys.secret);
  node.vrf_public = std::move(keys.public_key);
  nodes_.push_back(std::move(node));
  totals_.initial_deposits += deposit;
  return nodes_.back().id;
}

OracleNode& Chain::node(NodeId id) {
  if (id >= nodes_.size()) throw LookupError("unknown node " + std::to_string(id));
  return nodes_[id];
}

const OracleNode& Chain::node(NodeId id) const {
  if (id >= nodes_.size()) throw LookupError("unknown node " + std::to_string(id));
  return nodes_[id];
}

std::int64_t Chain::locked_deposits() const {
  std::int64_t total = 0;
  for (const auto& n : nodes_) {
    if (n.status != NodeStatus::Blacklisted) total += n.deposit;
  }
  return total;
}

std::int64_t Chain::total_balances() const {
  std::int64_t total = 0;
  for (const auto& n : nodes_) total += n.balance;
  return total;
}

bool Chain::balanced() const {
  return total_balances() + locked_deposits() + totals_.slashed == totals_.initial_deposits + totals_.rewards_minted;
}

void Chain::open_round(std::uint64_t round) {
  round_ = round;
  pending_.clear();
  answered_.clear();
  responses_.clear();
}

void Chain::dispatch(std::uint64_t task_id, NodeId id) {
  const auto& n = node(id);
  if (n.status == NodeStatus::Blacklisted) {
    throw ContractViolation("dispatch to blacklisted node " + std::to_string(id));
  }
  pending_.emplace(task_id, id);
}

bool Chain::dispatched(std::uint64_t task_id, NodeId id) const { return pending_.contains({task_id, id}); }

void Chain::record_response(const DataReport& report) {
  if (report.round != round_) throw ContractViolation("response for another round");
  if (!dispatched(report.task_id, report.node_id)) {
    throw ContractViolation("response to task " + std::to_string(report.task_id) + " was never dispatched to node " +
                            std::to_string(report.node_id));
  }
  if (!answered_.emplace(report.task_id, report.node_id).second) {
    throw ContractViolation("duplicate response to task " + std::to_string(report.task_id));
  }
  auto& n = node(report.node_id);
  n.response_times.push_back(report.response_time);
  responses_.push_back(report);
}

void Chain::pay(NodeId id, std::int64_t amount) {
  auto& n = node(id);
  if (n.status == NodeStatus::Blacklisted) throw ContractViolation("payment to blacklisted node");
  n.balance += amount;
  totals_.rewards_minted += amount;
}

std::int64_t Chain::deduct(NodeId id, double fraction) {
  auto& n = node(id);
  const auto amount = static_cast<std::int64_t>(std::floor(static_cast<double>(n.deposit) * fraction));
  n.deposit -= amount;
  totals_.slashed += amount;
  return amount;
}

StrikeReport Chain::strike(NodeId id) {
  auto report = ledger_.record_strike(node(id));
  totals_.slashed += report.deposit_slashed;
  return report;
}

void Chain::restore(std::vector<OracleNode> nodes, ChainTotals totals, std::uint64_t round) {
  nodes_ = std::move(nodes);
  totals_ = totals;
  open_round(round);
}

SettlementPolicy SettlementPolicy::for_strategy(Strategy s) {
  switch (s) {
    case Strategy::DecTest:
      return {true, true, true, true};
    case Strategy::WeightedRandom:
      return {false, false, true, true};
    case Strategy::PureRandom:
    case Strategy::DosLike:
      return {false, false, false, false};
  }
  return {};
}

void refresh_reputation(Chain& chain, std::uint64_t round, std::uint32_t total_sources,
                        const reputation::ReputationParams& params) {
  auto& nodes = chain.nodes();
  std::vector<std::size_t> members;
  std::vector<double> accumulated;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].status == NodeStatus::Blacklisted) continue;
    members.push_back(i);
    accumulated.push_back(nodes[i].accumulated_reputation);
  }
  if (members.empty()) return;
  const double total = std::accumulate(accumulated.begin(), accumulated.end(), 0.0);
  const auto population = members.size();
  for (std::size_t k = 0; k < population; ++k) {
    auto& n = nodes[members[k]];
    const std::size_t end = std::min<std::size_t>(n.tests_assigned.size(), round + 1);
    const std::size_t start = std::min(n.accuracy_window_start, end);
    std::span<const std::uint32_t> assigned(n.tests_assigned.data() + start, end - start);
    const std::uint64_t passed =
        std::accumulate(n.tests_passed.begin() + static_cast<std::ptrdiff_t>(start),
                        n.tests_passed.begin() + static_cast<std::ptrdiff_t>(end), std::uint64_t{0});
    const auto ac = reputation::accuracy_score(passed, assigned);
    const double diversity = params.diversity_from_sources
                                 ? reputation::source_diversity_factor(n.sources_seen.size(), total_sources,
                                                                       population)
                                 : params.diversity;
    // Same value as reputation_weight without re-summing per node.
    const double rw = static_cast<double>(population) * accumulated[k] / total * diversity;
    const auto rt = reputation::response_time_score(n.response_times, population);
    const double raw = reputation::update_reputation(ac.value, rw, rt.value, params, n.accumulated_reputation);
    n.reputation = reputation::apply_reputation_cap(raw, params);
  }
}

void refresh_weight_bases(const Chain& chain, selection::WeightTable& weights) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& n : chain.nodes()) {
    if (n.status == NodeStatus::Blacklisted) continue;
    total += n.reputation;
    ++count;
  }
  if (count == 0) return;
  const double mean = total / static_cast<double>(count);
  for (const auto& n : chain.nodes()) {
    if (!weights.contains(n.id)) continue;
    double base = n.reputation / mean;
    if (n.status == NodeStatus::Provisional) base *= 0.5;
    weights.set_base(n.id, base);
  }
}

void advance_accumulated(Chain& chain, std::uint64_t round) {
  for (auto& n : chain.nodes()) {
    if (n.status == NodeStatus::Blacklisted) continue;
    n.accumulated_reputation = n.reputation;
    n.accuracy_window_start = round;
  }
}

SettlementRecord settle_round(Chain& chain, selection::WeightTable& weights,
                              std::span<const committee::Verdict> verdicts, const SettlementInputs& inputs,
                              const reputation::ReputationParams& params) {
  if (inputs.round != chain.round()) throw ContractViolation("settlement for a round that is not open");
  std::vector<committee::Verdict> ordered(verdicts.begin(), verdicts.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    return std::pair(a.task_id, a.node_id) < std::pair(b.task_id, b.node_id);
  });

  SettlementRecord record;
  record.round = inputs.round;
  const auto slashed_before = chain.totals().slashed;
  const auto& policy = inputs.policy;

  for (const auto& v : ordered) {
    if (!chain.dispatched(v.task_id, v.node_id)) {
      throw ContractViolation("verdict for task " + std::to_string(v.task_id) + " does not belong to round " +
                              std::to_string(inputs.round));
    }
    auto& n = chain.node(v.node_id);
    if (n.status == NodeStatus::Blacklisted) continue;
    if (n.tests_assigned.size() <= inputs.round) {
      n.tests_assigned.resize(inputs.round + 1, 0);
      n.tests_passed.resize(inputs.round + 1, 0);
    }
    ++n.tests_assigned[inputs.round];
    if (v.outcome == selection::Outcome::Passed) {
      ++record.passed;
      ++n.tests_passed[inputs.round];
      if (policy.rewards) {
        chain.pay(n.id, chain.config().reward_per_pass);
        record.rewards_paid += chain.config().reward_per_pass;
      }
      if (policy.feedback) {
        selection::adjust_weight_on_outcome(weights, n.id, selection::Outcome::Passed, inputs.alpha);
        ++record.feedback_adjustments;
      }
      continue;
    }
    ++record.failed;
    if (!policy.penalties) continue;
    auto report = chain.strike(n.id);
    record.strikes.push_back(report);
    if (report.new_status == NodeStatus::Blacklisted) {
      weights.remove(n.id);
      record.blacklisted.push_back(n.id);
      continue;
    }
    chain.deduct(n.id, chain.config().strike_deduction);
    n.accumulated_reputation = reputation::punish(n.accumulated_reputation, n.strikes, params);
    if (policy.feedback) {
      selection::adjust_weight_on_outcome(weights, n.id, selection::Outcome::Failed, inputs.alpha);
      ++record.feedback_adjustments;
    }
  }

  if (policy.reputation) {
    refresh_reputation(chain, inputs.round, inputs.total_sources, params);
    refresh_weight_bases(chain, weights);
  }

  record.slashed = chain.totals().slashed - slashed_before;
  record.initial_deposits = chain.totals().initial_deposits;
  record.rewards_minted = chain.totals().rewards_minted;
  record.deposits_remaining = chain.locked_deposits();
  record.balances = chain.total_balances();
  record.total_slashed = chain.totals().slashed;
  return record;
}

}  // namespace oraclesim::chain
