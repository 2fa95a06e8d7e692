#include "oraclesim/simulation.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <unordered_map>

#include "oraclesim/errors.hpp"

namespace oraclesim {

using nlohmann::json;

namespace {

std::vector<NodeId> sorted_ids(const std::set<NodeId>& ids) { return {ids.begin(), ids.end()}; }

json roles_json(const selection::CommitteeRoles& roles) {
  return {{"questioner", roles.questioner}, {"judge", roles.judge}, {"validators", roles.validators}};
}

}  // namespace

Simulation::Simulation(Restore, RunConfig config, TraceSink trace)
    : config_(std::move(config)),
      trace_(std::move(trace)),
      chain_(config_.chain, config_.ledger),
      weights_(config_.population),
      mix_(config_.tasks.source_weights.empty()
               ? committee::TaskMix::uniform(config_.tasks.sources, config_.tasks.fields_per_source)
               : committee::TaskMix(config_.tasks.source_weights, config_.tasks.fields_per_source)),
      policy_(chain::SettlementPolicy::for_strategy(config_.strategy)) {}

Simulation::Simulation(RunConfig config, TraceSink trace) : Simulation(Restore{}, std::move(config), std::move(trace)) {
  config_.validate();
  const auto master = config_.seed;

  Rng alpha_rng(derive_seed(master, "alpha"));
  alpha_ = uniform(alpha_rng, config_.alpha_band.lo, config_.alpha_band.hi);

  Rng truth_rng(derive_seed(master, "truth"));
  truth_ = chain::GroundTruth(config_.tasks.sources, config_.tasks.fields_per_source, config_.tasks, truth_rng);

  // Malicious nodes are a uniformly random subset of size round(s * M).
  const auto malicious_count = static_cast<std::size_t>(
      std::llround(config_.malicious_fraction * static_cast<double>(config_.population)));
  std::vector<NodeId> order(config_.population);
  for (NodeId i = 0; i < order.size(); ++i) order[i] = i;
  Rng pop_rng(derive_seed(master, "population"));
  for (std::size_t i = 0; i < malicious_count; ++i) {
    const auto j = i + uniform_index(pop_rng, order.size() - i);
    std::swap(order[i], order[j]);
  }
  std::vector<bool> malicious(config_.population, false);
  for (std::size_t i = 0; i < malicious_count; ++i) malicious[order[i]] = true;

  emit({{"event", "header"},
        {"schema", kTraceSchemaVersion},
        {"run_id", config_.run_label()},
        {"strategy", std::string(to_string(config_.strategy))},
        {"alpha_band", config_.alpha_band.label()},
        {"alpha", alpha_},
        {"seed", config_.seed},
        {"tolerance", config_.tasks.tolerance},
        {"bins", config_.metrics.bins},
        {"range_factor", config_.metrics.range_factor},
        {"dos_stand_in", config_.strategy == Strategy::DosLike}});

  for (NodeId id = 0; id < config_.population; ++id) {
    BehaviorProfile behavior =
        malicious[id] ? BehaviorProfile::malicious(config_.misbehavior_probability) : BehaviorProfile::honest();
    behavior.falsify_min = config_.tasks.falsify_min;
    behavior.falsify_max = config_.tasks.falsify_max;
    behavior.latency_mu = config_.tasks.latency_mu;
    behavior.latency_sigma = config_.tasks.latency_sigma;
    chain_.register_node(config_.chain.registration_deposit, behavior, selection::vrf_keygen(master, id),
                         config_.reputation.initial_reputation);
    emit({{"event", "registration"},
          {"node", id},
          {"deposit", config_.chain.registration_deposit},
          {"behavior", std::string(to_string(behavior.kind))}});
  }
  if (policy_.reputation) chain::refresh_weight_bases(chain_, weights_);
}

void Simulation::emit(const json& event) const {
  if (trace_) trace_(event);
}

std::vector<selection::CommitteeCandidate> Simulation::committee_candidates(std::span<const NodeId> exclude) const {
  std::vector<selection::CommitteeCandidate> out;
  for (const auto& n : chain_.nodes()) {
    if (n.status != NodeStatus::Active) continue;
    if (std::find(exclude.begin(), exclude.end(), n.id) != exclude.end()) continue;
    out.push_back({n.id, n.vrf_secret, n.vrf_public});
  }
  return out;
}

void Simulation::elect_or_rotate(std::uint64_t round, const Digest& seed) {
  if (round == 0) {
    const auto candidates = committee_candidates({});
    const auto election = selection::select_committee(candidates, config_.committee.size, seed);
    committee_ = committee::from_election(election, 0, config_.committee.cycle);
    emit({{"event", "rotation"}, {"round", round}, {"epoch", 0}, {"roles", roles_json(committee_.roles)}});
    return;
  }
  if (round % committee_.cycle_length != 0) return;

  const auto candidates = committee_candidates({});
  const auto rotation = committee::rotate_committee(
      committee_, round, candidates, seed, config_.committee.size,
      [this](NodeId id) { return chain_.node(id).reputation; }, config_.reputation);
  if (!rotation.rotated) return;

  json event = {{"event", "rotation"}, {"round", round}, {"epoch", rotation.state.epoch}};
  if (policy_.reputation) {
    chain::advance_accumulated(chain_, round);
    if (config_.committee.reset_feedback) {
      for (NodeId id : weights_.selectable_ids()) weights_.set_feedback(id, 1.0);
    }
    if (rotation.settlement && policy_.rewards) {
      const auto& s = *rotation.settlement;
      for (std::size_t i = 0; i < s.members.size(); ++i) {
        auto& member = chain_.node(s.members[i]);
        if (member.status == NodeStatus::Blacklisted) continue;
        const double credited = member.accumulated_reputation + s.weights[i] * s.group_reward;
        member.accumulated_reputation = reputation::apply_reputation_cap(credited, config_.reputation);
      }
    }
  }
  if (rotation.settlement) {
    event["group_reward"] = rotation.settlement->group_reward;
    event["settled_members"] = rotation.settlement->members;
    event["contribution_weights"] = rotation.settlement->weights;
  }
  committee_ = rotation.state;
  event["roles"] = roles_json(committee_.roles);
  emit(event);
}

void Simulation::refill_committee(std::uint64_t round, const Digest& seed, std::span<const NodeId> feeders) {
  const auto members = committee_.roles.members();
  if (members.size() >= config_.committee.size) return;
  std::vector<NodeId> exclude(members.begin(), members.end());
  exclude.insert(exclude.end(), feeders.begin(), feeders.end());
  const auto candidates = committee_candidates(exclude);
  Bytes refill_seed(seed.begin(), seed.end());
  append_str(refill_seed, "refill");
  const auto election =
      selection::rank_by_vrf(candidates, config_.committee.size - members.size(), sha256(refill_seed));
  for (NodeId id : election.ranked) committee_.roles.validators.push_back(id);
  emit({{"event", "refill"}, {"round", round}, {"added", election.ranked}, {"roles", roles_json(committee_.roles)}});
}

metrics::RoundMetrics Simulation::run_round() {
  if (finished()) throw ContractViolation("simulation already ran all rounds");
  const std::uint64_t r = next_round_;
  const Digest seed = round_seed(config_.seed, r);
  const double tol = config_.tasks.tolerance;

  chain_.open_round(r);
  if (r > 0) {
    auto truth_rng = stream(seed, "truth");
    truth_.advance(truth_rng);
  }
  RoundAudit audit;
  audit.round = r;
  audit.blacklisted_before = sorted_ids(chain_.ledger().blacklist());

  // 1. committee rotation check
  elect_or_rotate(r, seed);

  // 2. covert drafting from a freshly provisioned repository
  const std::uint64_t test_count = config_.tests_per_round();
  committee::TestCaseRepository repo;
  {
    auto case_rng = stream(seed, "cases");
    std::vector<TestCase> cases;
    const std::uint64_t total = test_count + config_.committee.case_slack;
    for (std::uint64_t i = 0; i < total; ++i) {
      TestCase tc;
      tc.case_id = (r << 20) | i;
      tc.query = mix_.draw(case_rng);
      tc.expected_value = truth_.value(tc.query);
      tc.tolerance = tol;
      cases.push_back(tc);
    }
    repo.provision(std::move(cases));
  }
  auto draft_rng = stream(seed, "draft");
  auto drafted = committee::draft_test_tasks(repo, test_count, draft_rng, committee_);

  // 3. hybrid release
  std::vector<TaskRequest> tests;
  std::map<std::uint64_t, TestCase> case_by_id;
  for (const auto& d : drafted) {
    tests.push_back(d.request);
    case_by_id.emplace(d.test_case.case_id, d.test_case);
  }
  std::vector<TaskRequest> regular;
  {
    auto regular_rng = stream(seed, "regular");
    for (std::uint64_t i = 0; i < config_.tasks.regular_per_round; ++i) {
      TaskRequest t;
      t.query = mix_.draw(regular_rng);
      regular.push_back(t);
    }
  }
  auto schedule_rng = stream(seed, "schedule");
  const auto schedule = committee::schedule_release(std::move(tests), std::move(regular), schedule_rng, r << 20);

  // 4. feeder selection, never from the committee
  const auto members = committee_.roles.members();
  const std::size_t feeder_count =
      config_.strategy == Strategy::DosLike ? config_.quorum() : config_.feeders_per_round;
  auto select_rng = stream(seed, "select");
  const bool weighted = config_.strategy == Strategy::DecTest || config_.strategy == Strategy::WeightedRandom;
  const auto feeders = weighted ? selection::select_feeders(weights_, feeder_count, select_rng, members)
                                : selection::select_uniform(weights_, feeder_count, select_rng, members);
  audit.feeders = feeders;
  audit.committee = members;

  // 5. dispatch; covert task k goes to the k-th feeder of a random permutation
  std::vector<NodeId> targets = feeders;
  {
    auto assign_rng = stream(seed, "assign");
    for (std::size_t i = targets.size(); i > 1; --i) {
      std::swap(targets[i - 1], targets[uniform_index(assign_rng, i)]);
    }
  }
  std::vector<std::vector<NodeId>> assigned(schedule.requests.size());
  std::size_t covert_index = 0;
  for (std::size_t slot = 0; slot < schedule.requests.size(); ++slot) {
    if (schedule.covert[slot]) {
      assigned[slot] = {targets[covert_index++ % targets.size()]};
    } else {
      assigned[slot] = feeders;
    }
    for (NodeId id : assigned[slot]) chain_.dispatch(schedule.requests[slot].task_id, id);
    emit({{"event", "dispatch"},
          {"round", r},
          {"task", schedule.requests[slot].task_id},
          {"slot", slot},
          {"nodes", assigned[slot]}});
  }

  // 6. node responses
  std::unordered_map<NodeId, bool> engaged;
  for (NodeId id : feeders) {
    auto rng = stream(seed, "disposition", id);
    engaged[id] = chain::draw_disposition(chain_.node(id).behavior, rng);
  }
  for (NodeId id : members) {
    auto rng = stream(seed, "disposition", id);
    engaged[id] = chain::draw_disposition(chain_.node(id).behavior, rng);
  }
  std::unordered_map<NodeId, Rng> respond_rng;
  for (NodeId id : feeders) respond_rng.emplace(id, stream(seed, "respond", id));

  const chain::ResponseModel model{tol, config_.tasks.honest_noise};
  std::vector<metrics::ScoredReport> scored;
  std::map<std::pair<std::uint64_t, NodeId>, DataReport> report_of;
  std::set<NodeId> falsifiers;
  const auto views = schedule.views(r);
  for (std::size_t slot = 0; slot < views.size(); ++slot) {
    const double truth = truth_.value(views[slot].query);
    for (NodeId id : assigned[slot]) {
      auto& node = chain_.node(id);
      const auto response = chain::node_respond(node, views[slot], truth, engaged[id], model, respond_rng.at(id));
      chain_.record_response(response.report);
      node.sources_seen.insert(views[slot].query.source);
      if (response.falsified) falsifiers.insert(id);
      scored.push_back({response.report.value, truth});
      report_of.emplace(std::pair(response.report.task_id, id), response.report);
      emit({{"event", "report"},
            {"round", r},
            {"task", response.report.task_id},
            {"node", id},
            {"value", response.report.value},
            {"truth", truth},
            {"rt", response.report.response_time}});
    }
  }
  if (config_.strategy == Strategy::DosLike) {
    // Stand-in aggregation: median of the quorum's answers per regular task.
    for (std::size_t slot = 0; slot < views.size(); ++slot) {
      if (schedule.covert[slot]) continue;
      std::vector<double> values;
      for (NodeId id : assigned[slot]) values.push_back(report_of.at({views[slot].task_id, id}).value);
      std::sort(values.begin(), values.end());
      const std::size_t m = values.size();
      const double median = m % 2 == 1 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
      emit({{"event", "aggregate"}, {"round", r}, {"task", views[slot].task_id}, {"value", median}});
    }
  }

  // 7. publication and verification
  auto committee_rng = stream(seed, "committee");
  std::vector<committee::IssuedTest> issued;
  for (std::size_t slot = 0; slot < schedule.requests.size(); ++slot) {
    if (!schedule.covert[slot]) continue;
    const auto& req = schedule.requests[slot];
    issued.push_back({req.task_id, assigned[slot].front(), case_by_id.at(req.case_id)});
  }
  const NodeId questioner = committee_.roles.questioner;
  const auto& q_behavior = chain_.node(questioner).behavior;
  if (!issued.empty() && q_behavior.is_malicious() && engaged[questioner] &&
      bernoulli(committee_rng, config_.committee.tamper_probability)) {
    auto& victim = issued[uniform_index(committee_rng, issued.size())];
    const double offset = uniform(committee_rng, q_behavior.falsify_min, q_behavior.falsify_max) * tol;
    victim.test_case.expected_value += bernoulli(committee_rng, 0.5) ? -offset : offset;
    emit({{"event", "tamper"}, {"round", r}, {"questioner", questioner}, {"task", victim.task_id}});
  }

  const auto validators = committee_.roles.validators;
  std::vector<committee::Verdict> verdicts;
  std::map<NodeId, std::vector<std::uint64_t>> mismatches;
  for (std::size_t k = 0; k < issued.size(); ++k) {
    const NodeId holder = validators[k % validators.size()];
    const auto& test = issued[k];
    auto verdict = committee::verify_feed(report_of.at({test.task_id, test.target}), test);
    const auto& holder_behavior = chain_.node(holder).behavior;
    if (holder_behavior.is_malicious()) {
      // Colluding validator covers for malicious feeders.
      if (engaged[holder] && verdict.outcome == selection::Outcome::Failed &&
          chain_.node(test.target).behavior.is_malicious()) {
        verdict.outcome = selection::Outcome::Passed;
      }
    } else {
      const auto* truth_case = repo.find(test.test_case.case_id);
      if (truth_case != nullptr && truth_case->expected_value != test.test_case.expected_value) {
        mismatches[holder].push_back(test.task_id);
      }
    }
    committee_.contributions[holder] += 1;
    verdicts.push_back(verdict);
  }

  // 8. accusations
  std::vector<committee::Accusation> accusations;
  for (NodeId v : validators) {
    const auto& behavior = chain_.node(v).behavior;
    if (!behavior.is_malicious()) {
      auto it = mismatches.find(v);
      if (it != mismatches.end()) accusations.push_back({v, questioner, it->second});
    } else if (engaged[v] && !q_behavior.is_malicious() && !issued.empty() &&
               bernoulli(committee_rng, config_.committee.false_accusation_probability)) {
      accusations.push_back({v, questioner, {issued[uniform_index(committee_rng, issued.size())].task_id}});
    }
  }
  for (const auto& acc : accusations) {
    emit({{"event", "accusation"},
          {"round", r},
          {"accuser", acc.accuser},
          {"accused", acc.accused},
          {"evidence", acc.evidence}});
    const auto ruling = committee::adjudicate_accusation(acc, committee_, issued, repo);
    emit({{"event", "ruling"},
          {"round", r},
          {"kind", std::string(committee::to_string(ruling.kind))},
          {"accuser", ruling.accuser},
          {"accused", ruling.accused},
          {"tasks", ruling.confirmed_tasks}});
    if (ruling.kind == committee::RulingKind::Confirmed) {
      auto& culprit = chain_.node(ruling.accused);
      if (policy_.penalties && culprit.status != NodeStatus::Blacklisted) {
        const auto report = chain_.strike(culprit.id);
        ++audit.penalties;
        if (report.new_status == NodeStatus::Blacklisted) {
          weights_.remove(culprit.id);
        } else {
          culprit.accumulated_reputation =
              reputation::punish(culprit.accumulated_reputation, culprit.strikes, config_.reputation);
        }
      }
      // The judge re-checks the tampered tests against the repository.
      for (std::uint64_t task : ruling.confirmed_tasks) {
        auto it = std::find_if(issued.begin(), issued.end(), [&](const auto& t) { return t.task_id == task; });
        it->test_case.expected_value = repo.find(it->test_case.case_id)->expected_value;
        const auto fixed = committee::verify_feed(report_of.at({it->task_id, it->target}), *it);
        for (auto& v : verdicts) {
          if (v.task_id == fixed.task_id && v.node_id == fixed.node_id) v = fixed;
        }
      }
    } else if (ruling.kind == committee::RulingKind::Refuted && policy_.penalties) {
      auto& accuser = chain_.node(ruling.accuser);
      accuser.accumulated_reputation =
          reputation::punish(accuser.accumulated_reputation, accuser.strikes + 1, config_.reputation);
      ++audit.penalties;
    }
  }
  std::sort(verdicts.begin(), verdicts.end(), [](const auto& a, const auto& b) {
    return std::pair(a.task_id, a.node_id) < std::pair(b.task_id, b.node_id);
  });
  for (const auto& v : verdicts) {
    emit({{"event", "verdict"},
          {"round", r},
          {"task", v.task_id},
          {"node", v.node_id},
          {"outcome", v.outcome == selection::Outcome::Passed ? "passed" : "failed"},
          {"reported", v.reported_value},
          {"expected", v.expected_value}});
  }
  refill_committee(r, seed, feeders);

  // 9. settlement
  chain::SettlementInputs inputs;
  inputs.round = r;
  inputs.alpha = alpha_;
  inputs.total_sources = config_.tasks.sources;
  inputs.policy = policy_;
  auto record = chain::settle_round(chain_, weights_, verdicts, inputs, config_.reputation);
  audit.penalties += record.strikes.size();
  audit.feedback_adjustments = record.feedback_adjustments;
  if (policy_.rewards) {
    for (const auto& v : verdicts) {
      if (v.outcome == selection::Outcome::Passed) audit.paid.push_back(v.node_id);
    }
  }
  std::int64_t deposits = 0;
  for (const auto& n : chain_.nodes()) deposits += n.deposit;
  audit.balanced = record.balanced() && chain_.balanced();
  audit.locked_matches = deposits == chain_.locked_deposits();
  json strikes = json::array();
  for (const auto& s : record.strikes) {
    strikes.push_back({{"node", s.node},
                       {"from", std::string(to_string(s.old_status))},
                       {"to", std::string(to_string(s.new_status))},
                       {"strikes", s.strikes},
                       {"slashed", s.deposit_slashed}});
  }
  emit({{"event", "settlement"},
        {"round", r},
        {"passed", record.passed},
        {"failed", record.failed},
        {"rewards_paid", record.rewards_paid},
        {"slashed", record.slashed},
        {"strikes", strikes},
        {"blacklisted", record.blacklisted},
        {"deposits_remaining", record.deposits_remaining},
        {"balances", record.balances},
        {"total_slashed", record.total_slashed},
        {"rewards_minted", record.rewards_minted},
        {"initial_deposits", record.initial_deposits},
        {"balanced", audit.balanced}});

  // 10. metrics
  const std::vector<NodeId> acted(falsifiers.begin(), falsifiers.end());
  auto m = metrics::summarize_round(
      scored, verdicts, acted, [this](NodeId id) { return chain_.node(id).behavior.is_malicious(); }, tol,
      config_.metrics.bins, config_.metrics.range_factor * tol);
  m.run_id = config_.run_label();
  m.strategy = std::string(to_string(config_.strategy));
  m.alpha_band = config_.alpha_band.label();
  m.seed = config_.seed;
  m.round = r + 1;
  emit({{"event", "round"}, {"round", r}, {"feeders", feeders}, {"committee", members}, {"acted_maliciously", acted}});

  metrics_.push_back(m);
  audits_.push_back(std::move(audit));
  settlements_.push_back(std::move(record));
  ++next_round_;
  return m;
}

SimulationResult Simulation::result() const {
  SimulationResult out;
  out.config = config_;
  out.alpha = alpha_;
  out.metrics = metrics_;
  out.final_nodes = chain_.nodes();
  out.audits = audits_;
  out.settlements = settlements_;
  return out;
}

SimulationResult run_simulation(const RunConfig& config, TraceSink trace) {
  Simulation sim(config, std::move(trace));
  while (!sim.finished()) sim.run_round();
  return sim.result();
}

}  // namespace oraclesim
