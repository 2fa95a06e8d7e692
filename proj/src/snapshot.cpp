#include "oraclesim/snapshot.hpp"

#include <fstream>
#include <stdexcept>

#include "oraclesim/errors.hpp"

namespace oraclesim {

using nlohmann::json;

namespace {

NodeStatus status_from(const std::string& s) {
  if (s == "active") return NodeStatus::Active;
  if (s == "provisional") return NodeStatus::Provisional;
  if (s == "blacklisted") return NodeStatus::Blacklisted;
  throw std::runtime_error("snapshot: unknown node status '" + s + "'");
}

json node_json(const OracleNode& n) {
  return {{"id", n.id},
          {"deposit", n.deposit},
          {"balance", n.balance},
          {"reputation", n.reputation},
          {"accumulated_reputation", n.accumulated_reputation},
          {"response_times", n.response_times},
          {"tests_assigned", n.tests_assigned},
          {"tests_passed", n.tests_passed},
          {"accuracy_window_start", n.accuracy_window_start},
          {"strikes", n.strikes},
          {"status", std::string(to_string(n.status))},
          {"behavior",
           {{"kind", std::string(to_string(n.behavior.kind))},
            {"misbehavior_probability", n.behavior.misbehavior_probability},
            {"falsify_min", n.behavior.falsify_min},
            {"falsify_max", n.behavior.falsify_max},
            {"latency_mu", n.behavior.latency_mu},
            {"latency_sigma", n.behavior.latency_sigma}}},
          {"sources_seen", n.sources_seen},
          {"vrf_secret", to_hex(n.vrf_secret)},
          {"vrf_public", to_hex(n.vrf_public)}};
}

OracleNode node_from(const json& j) {
  OracleNode n;
  n.id = j.at("id").get<NodeId>();
  n.deposit = j.at("deposit").get<std::int64_t>();
  n.balance = j.at("balance").get<std::int64_t>();
  n.reputation = j.at("reputation").get<double>();
  n.accumulated_reputation = j.at("accumulated_reputation").get<double>();
  n.response_times = j.at("response_times").get<std::vector<double>>();
  n.tests_assigned = j.at("tests_assigned").get<std::vector<std::uint32_t>>();
  n.tests_passed = j.at("tests_passed").get<std::vector<std::uint32_t>>();
  n.accuracy_window_start = j.at("accuracy_window_start").get<std::size_t>();
  n.strikes = j.at("strikes").get<std::uint32_t>();
  n.status = status_from(j.at("status").get<std::string>());
  const auto& b = j.at("behavior");
  n.behavior.kind = b.at("kind").get<std::string>() == "malicious" ? BehaviorKind::Malicious : BehaviorKind::Honest;
  n.behavior.misbehavior_probability = b.at("misbehavior_probability").get<double>();
  n.behavior.falsify_min = b.at("falsify_min").get<double>();
  n.behavior.falsify_max = b.at("falsify_max").get<double>();
  n.behavior.latency_mu = b.at("latency_mu").get<double>();
  n.behavior.latency_sigma = b.at("latency_sigma").get<double>();
  n.sources_seen = j.at("sources_seen").get<std::set<std::uint32_t>>();
  n.vrf_secret = from_hex(j.at("vrf_secret").get<std::string>());
  n.vrf_public = from_hex(j.at("vrf_public").get<std::string>());
  return n;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(); }

std::optional<double> optional_from(const json& j) {
  return j.is_null() ? std::nullopt : std::optional<double>(j.get<double>());
}

}  // namespace

json Simulation::snapshot() const {
  json nodes = json::array();
  for (const auto& n : chain_.nodes()) nodes.push_back(node_json(n));

  json weights = json::array();
  for (NodeId id = 0; id < weights_.capacity(); ++id) {
    if (weights_.contains(id)) {
      weights.push_back({{"base", weights_.base(id)}, {"feedback", weights_.feedback(id)}});
    } else {
      weights.push_back(nullptr);
    }
  }

  json contributions = json::array();
  for (const auto& [id, count] : committee_.contributions) contributions.push_back({id, count});

  json rows = json::array();
  for (const auto& m : metrics_) {
    rows.push_back({{"run_id", m.run_id},
                    {"strategy", m.strategy},
                    {"alpha_band", m.alpha_band},
                    {"seed", m.seed},
                    {"round", m.round},
                    {"entropy", optional_json(m.entropy)},
                    {"detection_success_rate", optional_json(m.detection_success_rate)},
                    {"feed_accuracy", optional_json(m.feed_accuracy)},
                    {"true_malicious_active", m.true_malicious_active},
                    {"malicious_detected", m.malicious_detected}});
  }

  json committee = {{"questioner", committee_.roles.questioner},
                    {"judge", committee_.roles.judge},
                    {"validators", committee_.roles.validators},
                    {"epoch", committee_.epoch},
                    {"cycle_length", committee_.cycle_length},
                    {"contributions", contributions},
                    {"issuances", committee_.issuances},
                    {"promoted_questioner", committee_.promoted_questioner ? json(*committee_.promoted_questioner)
                                                                           : json()}};

  return {{"schema", kSnapshotSchemaVersion},
          {"config", to_yaml(config_)},
          {"alpha", alpha_},
          {"next_round", next_round_},
          {"nodes", nodes},
          {"ledger",
           {{"provisional", chain_.ledger().provisional()},
            {"blacklist", chain_.ledger().blacklist()},
            {"total_slashed", chain_.ledger().total_slashed()}}},
          {"totals",
           {{"initial_deposits", chain_.totals().initial_deposits},
            {"rewards_minted", chain_.totals().rewards_minted},
            {"slashed", chain_.totals().slashed}}},
          {"weights", weights},
          {"truth", {{"base", truth_.base()}, {"offset", truth_.offset()}}},
          {"committee", committee},
          {"metrics", rows}};
}

Simulation Simulation::from_snapshot(const json& snap, TraceSink trace) {
  if (snap.at("schema").get<int>() != kSnapshotSchemaVersion) {
    throw std::runtime_error("unsupported snapshot schema " + snap.at("schema").dump());
  }
  auto config = parse_config_text(snap.at("config").get<std::string>());
  config.validate();
  Simulation sim(Restore{}, config, std::move(trace));
  sim.alpha_ = snap.at("alpha").get<double>();
  sim.next_round_ = snap.at("next_round").get<std::uint64_t>();

  std::vector<OracleNode> nodes;
  for (const auto& j : snap.at("nodes")) nodes.push_back(node_from(j));
  if (nodes.size() != config.population) throw std::runtime_error("snapshot node count differs from population");
  const auto& t = snap.at("totals");
  chain::ChainTotals totals{t.at("initial_deposits").get<std::int64_t>(), t.at("rewards_minted").get<std::int64_t>(),
                            t.at("slashed").get<std::int64_t>()};
  sim.chain_.restore(std::move(nodes), totals, sim.next_round_);
  const auto& l = snap.at("ledger");
  sim.chain_.ledger().restore(l.at("provisional").get<std::set<NodeId>>(), l.at("blacklist").get<std::set<NodeId>>(),
                              l.at("total_slashed").get<std::int64_t>());

  const auto& w = snap.at("weights");
  for (NodeId id = 0; id < w.size(); ++id) {
    if (w[id].is_null()) {
      sim.weights_.remove(id);
    } else {
      sim.weights_.set_base(id, w[id].at("base").get<double>());
      sim.weights_.set_feedback(id, w[id].at("feedback").get<double>());
    }
  }

  Rng unused(0);
  sim.truth_ = chain::GroundTruth(config.tasks.sources, config.tasks.fields_per_source, config.tasks, unused);
  sim.truth_.restore(snap.at("truth").at("base").get<std::vector<double>>(),
                     snap.at("truth").at("offset").get<std::vector<double>>());

  const auto& c = snap.at("committee");
  sim.committee_.roles.questioner = c.at("questioner").get<NodeId>();
  sim.committee_.roles.judge = c.at("judge").get<NodeId>();
  sim.committee_.roles.validators = c.at("validators").get<std::vector<NodeId>>();
  sim.committee_.epoch = c.at("epoch").get<std::uint64_t>();
  sim.committee_.cycle_length = c.at("cycle_length").get<std::uint64_t>();
  for (const auto& pair : c.at("contributions")) {
    sim.committee_.contributions[pair.at(0).get<NodeId>()] = pair.at(1).get<std::uint64_t>();
  }
  sim.committee_.issuances = c.at("issuances").get<std::uint64_t>();
  if (!c.at("promoted_questioner").is_null()) sim.committee_.promoted_questioner = c.at("promoted_questioner").get<NodeId>();

  for (const auto& j : snap.at("metrics")) {
    metrics::RoundMetrics m;
    m.run_id = j.at("run_id").get<std::string>();
    m.strategy = j.at("strategy").get<std::string>();
    m.alpha_band = j.at("alpha_band").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.round = j.at("round").get<std::uint64_t>();
    m.entropy = optional_from(j.at("entropy"));
    m.detection_success_rate = optional_from(j.at("detection_success_rate"));
    m.feed_accuracy = optional_from(j.at("feed_accuracy"));
    m.true_malicious_active = j.at("true_malicious_active").get<std::uint64_t>();
    m.malicious_detected = j.at("malicious_detected").get<std::uint64_t>();
    sim.metrics_.push_back(std::move(m));
  }
  return sim;
}

namespace snapshot {

void save(const Simulation& sim, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << sim.snapshot().dump(1) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

Simulation load(const std::string& path, TraceSink trace) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot " + path);
  json snap;
  try {
    snap = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("snapshot " + path + ": " + e.what());
  }
  return Simulation::from_snapshot(snap, std::move(trace));
}

}  // namespace snapshot
}  // namespace oraclesim
