#include "oraclesim/committee.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "oraclesim/errors.hpp"

namespace oraclesim::committee {

TaskMix::TaskMix(std::vector<double> source_weights, std::uint32_t fields_per_source)
    : weights_(std::move(source_weights)), fields_(fields_per_source) {
  if (weights_.empty()) throw DomainError("task mix needs at least one source");
  if (fields_ == 0) throw DomainError("fields per source must be positive");
  double acc = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw DomainError("source weights must be non-negative");
    acc += w;
    cumulative_.push_back(acc);
  }
  if (!(acc > 0.0)) throw DomainError("source weights sum to zero");
}

TaskMix TaskMix::uniform(std::uint32_t sources, std::uint32_t fields_per_source) {
  return TaskMix(std::vector<double>(sources, 1.0), fields_per_source);
}

Query TaskMix::draw(Rng& rng) const {
  const double target = uniform01(rng) * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) --it;
  Query q;
  q.source = static_cast<std::uint32_t>(it - cumulative_.begin());
  q.field = static_cast<std::uint32_t>(uniform_index(rng, fields_));
  return q;
}

double TaskMix::probability(std::uint32_t source) const {
  if (source >= weights_.size()) throw LookupError("unknown source " + std::to_string(source));
  return weights_[source] / cumulative_.back();
}

void TestCaseRepository::provision(std::vector<TestCase> cases) {
  for (const auto& c : cases) {
    if (!(c.tolerance >= 0.0)) throw DomainError("test case tolerance must be non-negative");
  }
  cases_ = std::move(cases);
  used_.assign(cases_.size(), false);
}

std::size_t TestCaseRepository::unused_count() const noexcept {
  return static_cast<std::size_t>(std::count(used_.begin(), used_.end(), false));
}

const TestCase* TestCaseRepository::find(std::uint64_t case_id) const {
  for (const auto& c : cases_) {
    if (c.case_id == case_id) return &c;
  }
  return nullptr;
}

std::vector<TestCase> TestCaseRepository::take(std::size_t count, Rng& rng) {
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < cases_.size(); ++i) {
    if (!used_[i]) free.push_back(i);
  }
  if (count > free.size()) {
    throw DraftingError("test-case repository exhausted: need " + std::to_string(count) + ", have " +
                        std::to_string(free.size()));
  }
  std::vector<TestCase> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, free.size() - i));
    std::swap(free[i], free[j]);
    used_[free[i]] = true;
    out.push_back(cases_[free[i]]);
  }
  return out;
}

void TestCaseRepository::restore(std::vector<TestCase> cases, std::vector<bool> used) {
  if (cases.size() != used.size()) throw DomainError("repository snapshot is inconsistent");
  cases_ = std::move(cases);
  used_ = std::move(used);
}

std::vector<DraftedTest> draft_test_tasks(TestCaseRepository& repo, std::size_t count, Rng& rng,
                                          CommitteeState& state) {
  std::vector<DraftedTest> drafted;
  if (count == 0) return drafted;
  for (auto& tc : repo.take(count, rng)) {
    DraftedTest d;
    d.request.query = tc.query;
    d.request.covert = true;
    d.request.case_id = tc.case_id;
    d.test_case = std::move(tc);
    drafted.push_back(std::move(d));
  }
  ++state.issuances;
  state.contributions[state.roles.questioner] += count;
  return drafted;
}

std::vector<TaskView> ReleaseSchedule::views(std::uint64_t round) const {
  std::vector<TaskView> out;
  out.reserve(requests.size());
  for (const auto& r : requests) out.push_back(view_of(r, round));
  return out;
}

ReleaseSchedule schedule_release(std::vector<TaskRequest> test_tasks, std::vector<TaskRequest> regular_tasks,
                                 Rng& rng, std::uint64_t first_task_id) {
  const std::size_t total = test_tasks.size() + regular_tasks.size();
  std::vector<bool> slot_is_test(total, false);
  std::fill_n(slot_is_test.begin(), test_tasks.size(), true);
  // Fisher-Yates over the slot flags: every placement of the test tasks is
  // equally likely.
  for (std::size_t i = total; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    bool tmp = slot_is_test[i - 1];
    slot_is_test[i - 1] = slot_is_test[j];
    slot_is_test[j] = tmp;
  }
  ReleaseSchedule schedule;
  schedule.requests.reserve(total);
  schedule.covert = slot_is_test;
  std::size_t next_test = 0;
  std::size_t next_regular = 0;
  for (std::size_t slot = 0; slot < total; ++slot) {
    TaskRequest r = slot_is_test[slot] ? std::move(test_tasks[next_test++]) : std::move(regular_tasks[next_regular++]);
    r.release_slot = slot;
    r.task_id = first_task_id + slot;
    schedule.requests.push_back(std::move(r));
  }
  return schedule;
}

Verdict verify_feed(const DataReport& report, const IssuedTest& test) {
  if (report.task_id != test.task_id) {
    throw ContractViolation("report for task " + std::to_string(report.task_id) + " checked against test task " +
                            std::to_string(test.task_id));
  }
  Verdict v;
  v.task_id = report.task_id;
  v.node_id = report.node_id;
  v.reported_value = report.value;
  v.expected_value = test.test_case.expected_value;
  v.outcome = std::fabs(report.value - test.test_case.expected_value) <= test.test_case.tolerance
                  ? selection::Outcome::Passed
                  : selection::Outcome::Failed;
  return v;
}

std::string_view to_string(RulingKind kind) {
  switch (kind) {
    case RulingKind::Confirmed:
      return "confirmed";
    case RulingKind::Refuted:
      return "refuted";
    case RulingKind::Rejected:
      return "rejected";
  }
  return "unknown";
}

Ruling adjudicate_accusation(const Accusation& accusation, CommitteeState& state,
                             std::span<const IssuedTest> issued, const TestCaseRepository& repo) {
  Ruling ruling;
  ruling.accuser = accusation.accuser;
  ruling.accused = accusation.accused;
  auto& validators = state.roles.validators;
  const bool accuser_is_validator =
      std::find(validators.begin(), validators.end(), accusation.accuser) != validators.end();
  if (!accuser_is_validator || accusation.accused != state.roles.questioner) {
    ruling.kind = RulingKind::Rejected;
    return ruling;
  }
  state.contributions[state.roles.judge] += 1;

  bool all_genuine = !accusation.evidence.empty();
  for (std::uint64_t task_id : accusation.evidence) {
    auto it = std::find_if(issued.begin(), issued.end(), [&](const IssuedTest& t) { return t.task_id == task_id; });
    const TestCase* truth = it == issued.end() ? nullptr : repo.find(it->test_case.case_id);
    if (truth == nullptr || truth->expected_value == it->test_case.expected_value) {
      all_genuine = false;
      break;
    }
    ruling.confirmed_tasks.push_back(task_id);
  }
  if (!all_genuine) {
    ruling.confirmed_tasks.clear();
    ruling.kind = RulingKind::Refuted;
    return ruling;
  }
  ruling.kind = RulingKind::Confirmed;
  validators.erase(std::remove(validators.begin(), validators.end(), accusation.accuser), validators.end());
  state.contributions.erase(state.roles.questioner);
  state.roles.questioner = accusation.accuser;
  state.promoted_questioner = accusation.accuser;
  return ruling;
}

std::vector<double> normalize_contributions(std::span<const double> raw) {
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  if (!(total > 0.0)) return {};
  std::vector<double> out(raw.begin(), raw.end());
  for (double& w : out) w /= total;
  return out;
}

CommitteeState from_election(const selection::CommitteeElection& election, std::uint64_t epoch,
                             std::uint64_t cycle_length) {
  CommitteeState s;
  s.roles = election.roles;
  s.epoch = epoch;
  s.cycle_length = cycle_length;
  return s;
}

Rotation rotate_committee(const CommitteeState& state, std::uint64_t round_index,
                          std::span<const selection::CommitteeCandidate> candidates,
                          std::span<const std::uint8_t> round_seed, std::size_t committee_size,
                          const std::function<double(NodeId)>& reputation_of,
                          const reputation::ReputationParams& params) {
  Rotation out;
  out.state = state;
  if (state.cycle_length == 0) throw DomainError("cycle length must be positive");
  if (round_index == 0 || round_index % state.cycle_length != 0) return out;

  CycleSettlement settlement;
  settlement.epoch = state.epoch;
  std::vector<double> raw;
  std::vector<double> reps;
  for (NodeId m : state.roles.members()) {
    auto it = state.contributions.find(m);
    settlement.members.push_back(m);
    raw.push_back(it == state.contributions.end() ? 0.0 : static_cast<double>(it->second));
    reps.push_back(reputation_of(m));
  }
  settlement.weights = normalize_contributions(raw);
  if (!settlement.weights.empty()) {
    settlement.group_reward =
        reputation::committee_reward(reps, settlement.weights, static_cast<double>(state.issuances),
                                     static_cast<double>(state.cycle_length), params);
    out.settlement = std::move(settlement);
  }

  std::optional<NodeId> keep = state.promoted_questioner;
  if (keep && std::none_of(candidates.begin(), candidates.end(),
                           [&](const selection::CommitteeCandidate& c) { return c.id == *keep; })) {
    keep.reset();
  }
  if (keep) {
    std::vector<selection::CommitteeCandidate> rest;
    for (const auto& c : candidates) {
      if (c.id != *keep) rest.push_back(c);
    }
    // The promoted accuser holds the questioner seat; the others are elected.
    if (committee_size < 3) throw DomainError("committee size must be at least 3");
    auto election = selection::rank_by_vrf(rest, committee_size - 1, round_seed);
    CommitteeState next;
    next.roles.questioner = *keep;
    next.roles.judge = election.ranked[0];
    next.roles.validators.assign(election.ranked.begin() + 1, election.ranked.end());
    next.epoch = state.epoch + 1;
    next.cycle_length = state.cycle_length;
    out.state = std::move(next);
    out.election = std::move(election);
  } else {
    auto election = selection::select_committee(candidates, committee_size, round_seed);
    out.state = from_election(election, state.epoch + 1, state.cycle_length);
    out.election = std::move(election);
  }
  out.rotated = true;
  return out;
}

}  // namespace oraclesim::committee
