#include "oraclesim/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "oraclesim/errors.hpp"

namespace oraclesim {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::DecTest:
      return "dectest";
    case Strategy::WeightedRandom:
      return "weighted_random";
    case Strategy::PureRandom:
      return "pure_random";
    case Strategy::DosLike:
      return "dos_like";
  }
  return "unknown";
}

std::optional<Strategy> strategy_from_string(std::string_view s) {
  for (auto k : {Strategy::DecTest, Strategy::WeightedRandom, Strategy::PureRandom, Strategy::DosLike}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string format_double(double v) { return format_number(v); }

struct Field {
  std::string path;
  std::function<void(RunConfig&, const YAML::Node&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
T scalar_as(const YAML::Node& node, const std::string& path, const char* type) {
  if (!node.IsScalar()) throw ValidationError({path + ": expected " + type});
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ValidationError({path + ": expected " + type + ", got '" + node.Scalar() + "'"});
  }
}

template <typename Access>
Field unsigned_field(std::string path, Access access) {
  return {path,
          [path, access](RunConfig& c, const YAML::Node& n) {
            const auto text = n.IsScalar() ? n.Scalar() : std::string();
            if (!text.empty() && text.front() == '-') throw ValidationError({path + ": must be non-negative"});
            using T = std::remove_reference_t<decltype(access(c))>;
            access(c) = scalar_as<T>(n, path, "a non-negative integer");
          },
          [access](const RunConfig& c) { return std::to_string(access(const_cast<RunConfig&>(c))); }};
}

template <typename Access>
Field signed_field(std::string path, Access access) {
  return {path,
          [path, access](RunConfig& c, const YAML::Node& n) {
            access(c) = scalar_as<std::int64_t>(n, path, "an integer");
          },
          [access](const RunConfig& c) { return std::to_string(access(const_cast<RunConfig&>(c))); }};
}

template <typename Access>
Field real_field(std::string path, Access access) {
  return {path,
          [path, access](RunConfig& c, const YAML::Node& n) {
            const double v = scalar_as<double>(n, path, "a number");
            if (!std::isfinite(v)) throw ValidationError({path + ": must be finite"});
            access(c) = v;
          },
          [access](const RunConfig& c) { return format_double(access(const_cast<RunConfig&>(c))); }};
}

template <typename Access>
Field bool_field(std::string path, Access access) {
  return {path,
          [path, access](RunConfig& c, const YAML::Node& n) { access(c) = scalar_as<bool>(n, path, "true or false"); },
          [access](const RunConfig& c) { return access(const_cast<RunConfig&>(c)) ? "true" : "false"; }};
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

template <typename Access>
Field string_field(std::string path, Access access) {
  return {path,
          [path, access](RunConfig& c, const YAML::Node& n) {
            access(c) = n.IsNull() ? std::string() : scalar_as<std::string>(n, path, "a string");
          },
          [access](const RunConfig& c) { return quote(access(const_cast<RunConfig&>(c))); }};
}

#define ACCESS(expr) [](RunConfig& c) -> auto& { return c.expr; }

const std::vector<Field>& registry() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;
    f.push_back(unsigned_field("population", ACCESS(population)));
    f.push_back(unsigned_field("feeders_per_round", ACCESS(feeders_per_round)));
    f.push_back(real_field("malicious_fraction", ACCESS(malicious_fraction)));
    f.push_back(real_field("misbehavior_probability", ACCESS(misbehavior_probability)));
    f.push_back(unsigned_field("rounds", ACCESS(rounds)));
    f.push_back(unsigned_field("seed", ACCESS(seed)));
    f.push_back({"strategy",
                 [](RunConfig& c, const YAML::Node& n) {
                   const auto s = scalar_as<std::string>(n, "strategy", "a strategy name");
                   auto parsed = strategy_from_string(s);
                   if (!parsed) {
                     throw ValidationError(
                         {"strategy: unknown strategy '" + s + "' (dectest, weighted_random, pure_random, dos_like)"});
                   }
                   c.strategy = *parsed;
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.strategy)); }});
    f.push_back({"alpha_band",
                 [](RunConfig& c, const YAML::Node& n) {
                   if (n.IsSequence() && n.size() == 2) {
                     c.alpha_band.lo = scalar_as<double>(n[0], "alpha_band", "a number");
                     c.alpha_band.hi = scalar_as<double>(n[1], "alpha_band", "a number");
                     return;
                   }
                   // Also accepts the "lo-hi" label form.
                   const auto s = scalar_as<std::string>(n, "alpha_band", "[lo, hi]");
                   const auto dash = s.find('-', 1);
                   try {
                     if (dash == std::string::npos) throw std::invalid_argument(s);
                     c.alpha_band.lo = std::stod(s.substr(0, dash));
                     c.alpha_band.hi = std::stod(s.substr(dash + 1));
                   } catch (const std::exception&) {
                     throw ValidationError({"alpha_band: expected [lo, hi] or 'lo-hi', got '" + s + "'"});
                   }
                 },
                 [](const RunConfig& c) {
                   return "[" + format_double(c.alpha_band.lo) + ", " + format_double(c.alpha_band.hi) + "]";
                 }});
    f.push_back(unsigned_field("dos_quorum", ACCESS(dos_quorum)));

    f.push_back(unsigned_field("committee.size", ACCESS(committee.size)));
    f.push_back(unsigned_field("committee.cycle", ACCESS(committee.cycle)));
    f.push_back(unsigned_field("committee.tests_per_round", ACCESS(committee.tests_per_round)));
    f.push_back(unsigned_field("committee.case_slack", ACCESS(committee.case_slack)));
    f.push_back(real_field("committee.tamper_probability", ACCESS(committee.tamper_probability)));
    f.push_back(real_field("committee.false_accusation_probability", ACCESS(committee.false_accusation_probability)));
    f.push_back(bool_field("committee.reset_feedback", ACCESS(committee.reset_feedback)));

    f.push_back(real_field("reputation.cap_threshold", ACCESS(reputation.cap_threshold)));
    f.push_back(real_field("reputation.decay_scale", ACCESS(reputation.decay_scale)));
    f.push_back(real_field("reputation.beta", ACCESS(reputation.beta)));
    f.push_back(real_field("reputation.gamma", ACCESS(reputation.gamma)));
    f.push_back(real_field("reputation.delta", ACCESS(reputation.delta)));
    f.push_back(real_field("reputation.diversity", ACCESS(reputation.diversity)));
    f.push_back(bool_field("reputation.diversity_from_sources", ACCESS(reputation.diversity_from_sources)));
    f.push_back(unsigned_field("reputation.punish_base", ACCESS(reputation.punish_base)));
    f.push_back(real_field("reputation.punish_offset", ACCESS(reputation.punish_offset)));
    f.push_back(real_field("reputation.punish_adjust", ACCESS(reputation.punish_adjust)));
    f.push_back(real_field("reputation.workload_exponent", ACCESS(reputation.workload_exponent)));
    f.push_back(real_field("reputation.workload_min", ACCESS(reputation.workload_min)));
    f.push_back(real_field("reputation.workload_max", ACCESS(reputation.workload_max)));
    f.push_back({"reputation.rt_orientation",
                 [](RunConfig& c, const YAML::Node& n) {
                   const auto s = scalar_as<std::string>(n, "reputation.rt_orientation", "literal or inverted");
                   if (s != "literal" && s != "inverted") {
                     throw ValidationError({"reputation.rt_orientation: expected literal or inverted, got '" + s + "'"});
                   }
                   c.reputation.rt_orientation = reputation::rt_orientation_from_string(s);
                 },
                 [](const RunConfig& c) { return std::string(reputation::to_string(c.reputation.rt_orientation)); }});
    f.push_back(real_field("reputation.initial_reputation", ACCESS(reputation.initial_reputation)));

    f.push_back(unsigned_field("ledger.provisional_threshold", ACCESS(ledger.provisional_threshold)));
    f.push_back(unsigned_field("ledger.blacklist_threshold", ACCESS(ledger.blacklist_threshold)));

    f.push_back(signed_field("chain.registration_deposit", ACCESS(chain.registration_deposit)));
    f.push_back(signed_field("chain.minimum_deposit", ACCESS(chain.minimum_deposit)));
    f.push_back(signed_field("chain.reward_per_pass", ACCESS(chain.reward_per_pass)));
    f.push_back(real_field("chain.strike_deduction", ACCESS(chain.strike_deduction)));

    f.push_back(unsigned_field("tasks.regular_per_round", ACCESS(tasks.regular_per_round)));
    f.push_back(unsigned_field("tasks.sources", ACCESS(tasks.sources)));
    f.push_back(unsigned_field("tasks.fields_per_source", ACCESS(tasks.fields_per_source)));
    f.push_back({"tasks.source_weights",
                 [](RunConfig& c, const YAML::Node& n) {
                   c.tasks.source_weights.clear();
                   if (n.IsNull()) return;
                   if (!n.IsSequence()) throw ValidationError({"tasks.source_weights: expected a list of numbers"});
                   for (const auto& item : n) {
                     c.tasks.source_weights.push_back(scalar_as<double>(item, "tasks.source_weights", "a number"));
                   }
                 },
                 [](const RunConfig& c) {
                   std::string out = "[";
                   for (std::size_t i = 0; i < c.tasks.source_weights.size(); ++i) {
                     if (i) out += ", ";
                     out += format_double(c.tasks.source_weights[i]);
                   }
                   return out + "]";
                 }});
    f.push_back(real_field("tasks.tolerance", ACCESS(tasks.tolerance)));
    f.push_back(real_field("tasks.honest_noise", ACCESS(tasks.honest_noise)));
    f.push_back(real_field("tasks.falsify_min", ACCESS(tasks.falsify_min)));
    f.push_back(real_field("tasks.falsify_max", ACCESS(tasks.falsify_max)));
    f.push_back(real_field("tasks.truth_min", ACCESS(tasks.truth_min)));
    f.push_back(real_field("tasks.truth_max", ACCESS(tasks.truth_max)));
    f.push_back(real_field("tasks.truth_step", ACCESS(tasks.truth_step)));
    f.push_back(real_field("tasks.truth_band", ACCESS(tasks.truth_band)));
    f.push_back(real_field("tasks.latency_mu", ACCESS(tasks.latency_mu)));
    f.push_back(real_field("tasks.latency_sigma", ACCESS(tasks.latency_sigma)));

    f.push_back(unsigned_field("metrics.bins", ACCESS(metrics.bins)));
    f.push_back(real_field("metrics.range_factor", ACCESS(metrics.range_factor)));

    f.push_back(string_field("output.dir", ACCESS(output.dir)));
    f.push_back(string_field("output.run_id", ACCESS(output.run_id)));
    f.push_back(bool_field("output.trace", ACCESS(output.trace)));
    f.push_back(bool_field("output.csv", ACCESS(output.csv)));
    f.push_back(bool_field("output.json", ACCESS(output.json)));
    return f;
  }();
  return fields;
}

#undef ACCESS

const Field* find_field(const std::string& path) {
  for (const auto& f : registry()) {
    if (f.path == path) return &f;
  }
  return nullptr;
}

bool is_section(const std::string& path) {
  const auto prefix = path + ".";
  for (const auto& f : registry()) {
    if (f.path.rfind(prefix, 0) == 0) return true;
  }
  return false;
}

void apply_map(RunConfig& config, const YAML::Node& map, const std::string& prefix,
               std::vector<std::string>& problems) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    const auto path = prefix.empty() ? key : prefix + "." + key;
    if (const auto* field = find_field(path)) {
      try {
        field->set(config, kv.second);
      } catch (const ValidationError& e) {
        problems.insert(problems.end(), e.problems().begin(), e.problems().end());
      }
    } else if (is_section(path)) {
      if (kv.second.IsNull()) continue;
      if (!kv.second.IsMap()) {
        problems.push_back(path + ": expected a section");
        continue;
      }
      apply_map(config, kv.second, path, problems);
    } else {
      problems.push_back("unknown key: " + path);
    }
  }
}

}  // namespace

std::string AlphaBand::label() const { return format_double(lo) + "-" + format_double(hi); }

std::string RunConfig::run_label() const {
  if (!output.run_id.empty()) return output.run_id;
  return std::string(to_string(strategy)) + "-n" + std::to_string(feeders_per_round) + "-s" +
         format_double(malicious_fraction) + "-a" + alpha_band.label() + "-seed" + std::to_string(seed);
}

void RunConfig::validate() const {
  std::vector<std::string> problems;
  auto require = [&](bool ok, const std::string& message) {
    if (!ok) problems.push_back(message);
  };
  require(population >= 1, "population: must be at least 1");
  require(feeders_per_round >= 1, "feeders_per_round: must be at least 1");
  require(feeders_per_round <= population, "feeders_per_round: must not exceed population");
  require(malicious_fraction >= 0.0 && malicious_fraction <= 1.0, "malicious_fraction: must be in [0, 1]");
  require(misbehavior_probability >= 0.0 && misbehavior_probability <= 1.0,
          "misbehavior_probability: must be in [0, 1]");
  require(alpha_band.lo >= 0.0 && alpha_band.lo <= alpha_band.hi && alpha_band.hi < 1.0,
          "alpha_band: must satisfy 0 <= lo <= hi < 1");
  require(committee.size >= 3, "committee.size: must be at least 3");
  require(committee.cycle >= 1, "committee.cycle: must be at least 1");
  const auto working = strategy == Strategy::DosLike ? quorum() : feeders_per_round;
  require(strategy != Strategy::DosLike || quorum() <= population, "dos_quorum: must not exceed population");
  require(population >= committee.size + working,
          "population: must be at least committee.size + feeders_per_round (" +
              std::to_string(committee.size + working) + ")");
  require(committee.tamper_probability >= 0.0 && committee.tamper_probability <= 1.0,
          "committee.tamper_probability: must be in [0, 1]");
  require(committee.false_accusation_probability >= 0.0 && committee.false_accusation_probability <= 1.0,
          "committee.false_accusation_probability: must be in [0, 1]");
  require(ledger.provisional_threshold < ledger.blacklist_threshold,
          "ledger.provisional_threshold: must be below ledger.blacklist_threshold");
  require(chain.minimum_deposit >= 0, "chain.minimum_deposit: must be non-negative");
  require(chain.registration_deposit >= chain.minimum_deposit,
          "chain.registration_deposit: must be at least chain.minimum_deposit");
  require(chain.reward_per_pass >= 0, "chain.reward_per_pass: must be non-negative");
  require(chain.strike_deduction >= 0.0 && chain.strike_deduction <= 1.0, "chain.strike_deduction: must be in [0, 1]");
  require(tasks.sources >= 1, "tasks.sources: must be at least 1");
  require(tasks.fields_per_source >= 1, "tasks.fields_per_source: must be at least 1");
  if (!tasks.source_weights.empty()) {
    require(tasks.source_weights.size() == tasks.sources, "tasks.source_weights: needs one weight per source");
    double total = 0.0;
    bool negative = false;
    for (double w : tasks.source_weights) {
      negative = negative || !(w >= 0.0);
      total += w;
    }
    require(!negative && total > 0.0, "tasks.source_weights: must be non-negative with a positive sum");
  }
  require(tasks.tolerance > 0.0, "tasks.tolerance: must be positive");
  require(tasks.honest_noise >= 0.0 && tasks.honest_noise <= 1.0, "tasks.honest_noise: must be in [0, 1]");
  require(tasks.falsify_min > 1.0 && tasks.falsify_min <= tasks.falsify_max,
          "tasks.falsify_min: must satisfy 1 < falsify_min <= falsify_max");
  require(tasks.truth_min <= tasks.truth_max, "tasks.truth_min: must not exceed tasks.truth_max");
  require(tasks.truth_step >= 0.0, "tasks.truth_step: must be non-negative");
  require(tasks.truth_band >= 0.0, "tasks.truth_band: must be non-negative");
  require(tasks.latency_sigma >= 0.0, "tasks.latency_sigma: must be non-negative");
  require(metrics.bins >= 1, "metrics.bins: must be at least 1");
  require(metrics.range_factor > 0.0, "metrics.range_factor: must be positive");
  try {
    reputation.validate();
  } catch (const DomainError& e) {
    problems.push_back(std::string("reputation: ") + e.what());
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

RunConfig parse_config_text(std::string_view yaml, const RunConfig& base) {
  RunConfig config = base;
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    throw ValidationError({std::string("config: ") + e.what()});
  }
  if (root.IsNull()) return config;
  if (!root.IsMap()) throw ValidationError({"config: top level must be a mapping"});
  std::vector<std::string> problems;
  apply_map(config, root, "", problems);
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return config;
}

RunConfig load_config_file(const std::string& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"config: cannot read " + path});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), base);
}

void apply_overrides(RunConfig& config, const std::vector<std::string>& assignments) {
  std::vector<std::string> problems;
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) {
      problems.push_back("override '" + a + "': expected key=value");
      continue;
    }
    const auto key = a.substr(0, eq);
    const auto* field = find_field(key);
    if (field == nullptr) {
      problems.push_back("unknown key: " + key);
      continue;
    }
    try {
      field->set(config, YAML::Load(a.substr(eq + 1)));
    } catch (const ValidationError& e) {
      problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    } catch (const YAML::Exception& e) {
      problems.push_back(key + ": " + e.what());
    }
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

std::string to_yaml(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : registry()) {
    const auto dot = f.path.find('.');
    const auto sec = dot == std::string::npos ? std::string() : f.path.substr(0, dot);
    const auto key = dot == std::string::npos ? f.path : f.path.substr(dot + 1);
    if (sec != section) {
      section = sec;
      out += section + ":\n";
    }
    out += (section.empty() ? "" : "  ") + key + ": " + f.get(config) + "\n";
  }
  return out;
}

}  // namespace oraclesim
