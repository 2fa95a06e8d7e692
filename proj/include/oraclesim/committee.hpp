#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "oraclesim/domain.hpp"
#include "oraclesim/reputation.hpp"
#include "oraclesim/rng.hpp"
#include "oraclesim/selection.hpp"

namespace oraclesim::committee {

// Relative frequency of each data source among requests. Regular tasks and
// drafted test tasks both sample from the same mix.
class TaskMix {
 public:
  explicit TaskMix(std::vector<double> source_weights, std::uint32_t fields_per_source = 4);
  static TaskMix uniform(std::uint32_t sources, std::uint32_t fields_per_source = 4);

  Query draw(Rng& rng) const;
  std::size_t source_count() const noexcept { return cumulative_.size(); }
  double probability(std::uint32_t source) const;
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::uint32_t fields_per_source() const noexcept { return fields_; }

 private:
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  std::uint32_t fields_;
};

// Verified test cases available to the questioner. The harness provisions a
// fresh batch each round; drafted cases are marked used.
class TestCaseRepository {
 public:
  void provision(std::vector<TestCase> cases);
  std::size_t unused_count() const noexcept;
  const TestCase* find(std::uint64_t case_id) const;
  std::vector<TestCase> take(std::size_t count, Rng& rng);
  const std::vector<TestCase>& cases() const noexcept { return cases_; }
  const std::vector<bool>& used() const noexcept { return used_; }
  void restore(std::vector<TestCase> cases, std::vector<bool> used);

 private:
  std::vector<TestCase> cases_;
  std::vector<bool> used_;
};

struct CommitteeState {
  selection::CommitteeRoles roles;
  std::uint64_t epoch = 0;
  std::uint64_t cycle_length = 10;
  // Issued tasks for the questioner, rulings for the judge, verdicts for validators.
  std::map<NodeId, std::uint64_t> contributions;
  // Number of draft issuances in the current epoch (D).
  std::uint64_t issuances = 0;
  // Accuser promoted after a confirmed accusation; keeps the questioner seat
  // through the next election.
  std::optional<NodeId> promoted_questioner;
};

// A drafted covert test: the request as released plus the case it checks.
struct DraftedTest {
  TaskRequest request;
  TestCase test_case;
};

std::vector<DraftedTest> draft_test_tasks(TestCaseRepository& repo, std::size_t count, Rng& rng,
                                          CommitteeState& state);

struct ReleaseSchedule {
  // Release order. Every entry carries task_id and release_slot.
  std::vector<TaskRequest> requests;
  // Harness-side view of the same order.
  std::vector<bool> covert;

  std::vector<TaskView> views(std::uint64_t round) const;
};

// Places the test tasks at uniformly random positions among the regular tasks,
// which keep their relative order. Task ids are assigned by release slot
// starting at `first_task_id`, so ids carry no hint of which tasks are covert.
ReleaseSchedule schedule_release(std::vector<TaskRequest> test_tasks, std::vector<TaskRequest> regular_tasks,
                                 Rng& rng, std::uint64_t first_task_id = 0);

// A test as published by the questioner to the validators.
struct IssuedTest {
  std::uint64_t task_id = 0;
  NodeId target = 0;
  TestCase test_case;
};

struct Verdict {
  std::uint64_t task_id = 0;
  NodeId node_id = 0;
  selection::Outcome outcome = selection::Outcome::Passed;
  double reported_value = 0.0;
  double expected_value = 0.0;
};

// Passed iff |reported - expected| <= tolerance (inclusive boundary).
Verdict verify_feed(const DataReport& report, const IssuedTest& test);

struct Accusation {
  NodeId accuser = 0;
  NodeId accused = 0;
  std::vector<std::uint64_t> evidence;
};

enum class RulingKind : std::uint8_t { Confirmed, Refuted, Rejected };
std::string_view to_string(RulingKind kind);

struct Ruling {
  RulingKind kind = RulingKind::Rejected;
  NodeId accuser = 0;
  NodeId accused = 0;
  // Task ids whose published expectation disagreed with the repository.
  std::vector<std::uint64_t> confirmed_tasks;
};

// The judge checks every cited task against the repository. Confirmed: the
// questioner is dropped and the accuser takes the seat (now and for the next
// election). Refuted: committee unchanged; the caller penalizes the accuser.
// Malformed (accuser not a validator, accused not the questioner): rejected.
Ruling adjudicate_accusation(const Accusation& accusation, CommitteeState& state,
                             std::span<const IssuedTest> issued, const TestCaseRepository& repo);

struct CycleSettlement {
  std::uint64_t epoch = 0;
  std::vector<NodeId> members;
  std::vector<double> weights;  // normalized contributions
  double group_reward = 0.0;    // R_g
};

// Contribution counts scaled to sum to 1. Empty when nothing was contributed.
std::vector<double> normalize_contributions(std::span<const double> raw);

struct Rotation {
  CommitteeState state;
  bool rotated = false;
  std::optional<CycleSettlement> settlement;
  std::optional<selection::CommitteeElection> election;
};

// At round_index = k * cycle_length (k >= 1): settle the cycle reward, reset
// counters and elect a fresh committee. Otherwise returns `state` unchanged.
Rotation rotate_committee(const CommitteeState& state, std::uint64_t round_index,
                          std::span<const selection::CommitteeCandidate> candidates,
                          std::span<const std::uint8_t> round_seed, std::size_t committee_size,
                          const std::function<double(NodeId)>& reputation_of,
                          const reputation::ReputationParams& params);

// Fresh state from an election (epoch and cycle length supplied by caller).
CommitteeState from_election(const selection::CommitteeElection& election, std::uint64_t epoch,
                             std::uint64_t cycle_length);

}  // namespace oraclesim::committee
