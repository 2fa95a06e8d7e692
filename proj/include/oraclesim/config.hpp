#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oraclesim/reputation.hpp"

namespace oraclesim {

enum class Strategy : std::uint8_t { DecTest, WeightedRandom, PureRandom, DosLike };

std::string_view to_string(Strategy s);

// Shortest decimal text that parses back to the same double.
std::string format_number(double v);
std::optional<Strategy> strategy_from_string(std::string_view s);

struct AlphaBand {
  double lo = 0.01;
  double hi = 0.05;

  // "0.01-0.05"
  std::string label() const;
  friend bool operator==(const AlphaBand&, const AlphaBand&) = default;
};

struct CommitteeConfig {
  std::uint64_t size = 7;
  std::uint64_t cycle = 12;
  // 0 means one covert test per selected feeder.
  std::uint64_t tests_per_round = 0;
  // Extra verified cases provisioned per round beyond tests_per_round.
  std::uint64_t case_slack = 8;
  double tamper_probability = 0.05;
  double false_accusation_probability = 0.05;
  // Drop the accumulated pass/fail multipliers when a cycle settles, so
  // selection weights restart from reputation alone.
  bool reset_feedback = true;
};

struct LedgerConfig {
  std::uint32_t provisional_threshold = 0;
  std::uint32_t blacklist_threshold = 3;
};

struct ChainConfig {
  std::int64_t registration_deposit = 100;
  std::int64_t minimum_deposit = 100;
  std::int64_t reward_per_pass = 1;
  // Fraction of the remaining deposit deducted per strike.
  double strike_deduction = 0.1;
};

struct TaskConfig {
  std::uint64_t regular_per_round = 20;
  std::uint32_t sources = 50;
  std::uint32_t fields_per_source = 4;
  // Optional per-source mix; empty means uniform.
  std::vector<double> source_weights;
  double tolerance = 1.0;
  double honest_noise = 0.5;  // fraction of tolerance
  double falsify_min = 5.0;   // multiples of tolerance
  double falsify_max = 10.0;
  double truth_min = 50.0;
  double truth_max = 150.0;
  double truth_step = 0.5;
  double truth_band = 10.0;
  double latency_mu = 0.0;
  double latency_sigma = 0.25;
};

struct MetricsConfig {
  std::uint32_t bins = 20;
  // Histogram range as a multiple of the tolerance.
  double range_factor = 10.0;
};

struct OutputConfig {
  std::string dir = "out";
  std::string run_id;
  bool trace = true;
  bool csv = true;
  bool json = true;
};

struct RunConfig {
  std::uint64_t population = 500;
  std::uint64_t feeders_per_round = 50;
  double malicious_fraction = 0.3;
  double misbehavior_probability = 0.8;
  std::uint64_t rounds = 60;
  std::uint64_t seed = 1;
  Strategy strategy = Strategy::DecTest;
  AlphaBand alpha_band;
  // Quorum for the dos_like baseline; 0 means feeders_per_round.
  std::uint64_t dos_quorum = 0;

  CommitteeConfig committee;
  reputation::ReputationParams reputation;
  LedgerConfig ledger;
  ChainConfig chain;
  TaskConfig tasks;
  MetricsConfig metrics;
  OutputConfig output;

  std::uint64_t tests_per_round() const {
    return committee.tests_per_round == 0 ? feeders_per_round : committee.tests_per_round;
  }
  std::uint64_t quorum() const { return dos_quorum == 0 ? feeders_per_round : dos_quorum; }
  std::string run_label() const;

  // Throws ValidationError listing every offending field.
  void validate() const;
};

// YAML text -> config. Unknown keys and ill-typed values are validation errors
// naming the dotted field path.
RunConfig parse_config_text(std::string_view yaml, const RunConfig& base = {});
RunConfig load_config_file(const std::string& path, const RunConfig& base = {});

// Applies "dotted.key=value" overrides on top of `config`.
void apply_overrides(RunConfig& config, const std::vector<std::string>& assignments);

// Canonical YAML rendering. parse_config_text(to_yaml(c)) reproduces c.
std::string to_yaml(const RunConfig& config);

}  // namespace oraclesim
