#include "oraclesim/trace.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

namespace oraclesim::trace {

using nlohmann::json;

TraceSink ndjson_sink(std::ostream& out) {
  return [&out](const json& event) { out << event.dump() << '\n'; };
}

TraceSink collecting_sink(std::vector<json>& events) {
  return [&events](const json& event) { events.push_back(event); };
}

namespace {

struct RoundEvents {
  std::vector<metrics::ScoredReport> reports;
  std::vector<committee::Verdict> verdicts;
  std::vector<NodeId> acted;
  bool closed = false;
};

}  // namespace

std::vector<metrics::RoundMetrics> replay(const std::vector<json>& events) {
  if (events.empty() || events.front().value("event", "") != "header") {
    throw std::runtime_error("trace does not start with a header record");
  }
  const auto& header = events.front();
  if (header.at("schema").get<int>() != kTraceSchemaVersion) {
    throw std::runtime_error("unsupported trace schema " + header.at("schema").dump());
  }
  const double tol = header.at("tolerance").get<double>();
  const auto bins = header.at("bins").get<std::uint32_t>();
  const double range = header.at("range_factor").get<double>() * tol;

  std::set<NodeId> malicious;
  std::map<std::uint64_t, RoundEvents> rounds;
  for (const auto& e : events) {
    const auto kind = e.value("event", "");
    if (kind == "registration") {
      if (e.at("behavior").get<std::string>() == "malicious") malicious.insert(e.at("node").get<NodeId>());
    } else if (kind == "report") {
      rounds[e.at("round").get<std::uint64_t>()].reports.push_back(
          {e.at("value").get<double>(), e.at("truth").get<double>()});
    } else if (kind == "verdict") {
      committee::Verdict v;
      v.task_id = e.at("task").get<std::uint64_t>();
      v.node_id = e.at("node").get<NodeId>();
      v.outcome = e.at("outcome").get<std::string>() == "passed" ? selection::Outcome::Passed
                                                                 : selection::Outcome::Failed;
      v.reported_value = e.at("reported").get<double>();
      v.expected_value = e.at("expected").get<double>();
      rounds[e.at("round").get<std::uint64_t>()].verdicts.push_back(v);
    } else if (kind == "round") {
      auto& r = rounds[e.at("round").get<std::uint64_t>()];
      r.acted = e.at("acted_maliciously").get<std::vector<NodeId>>();
      r.closed = true;
    }
  }

  std::vector<metrics::RoundMetrics> out;
  for (const auto& [index, r] : rounds) {
    if (!r.closed) continue;  // truncated trace: drop the partial round
    auto m = metrics::summarize_round(
        r.reports, r.verdicts, r.acted, [&](NodeId id) { return malicious.contains(id); }, tol, bins, range);
    m.run_id = header.at("run_id").get<std::string>();
    m.strategy = header.at("strategy").get<std::string>();
    m.alpha_band = header.at("alpha_band").get<std::string>();
    m.seed = header.at("seed").get<std::uint64_t>();
    m.round = index + 1;
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<metrics::RoundMetrics> replay(std::istream& ndjson) {
  std::vector<json> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ndjson, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      events.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return replay(events);
}

}  // namespace oraclesim::trace
