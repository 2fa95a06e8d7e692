#include "oraclesim/reputation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "oraclesim/errors.hpp"

namespace oraclesim::reputation {

std::string_view to_string(RtOrientation o) { return o == RtOrientation::Literal ? "literal" : "inverted"; }

RtOrientation rt_orientation_from_string(std::string_view s) {
  if (s == "literal") return RtOrientation::Literal;
  if (s == "inverted") return RtOrientation::Inverted;
  throw DomainError("unknown rt_orientation '" + std::string(s) + "'");
}

void ReputationParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw DomainError(what);
  };
  require(cap_threshold > 0.0, "cap_threshold must be positive");
  require(decay_scale > 0.0, "decay_scale must be positive");
  require(beta > 0.0 && beta < 1.0, "beta must lie in (0, 1)");
  require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(diversity > 0.0, "diversity must be positive");
  require(punish_base >= 1, "punish_base must be a positive integer");
  require(punish_offset > 0.0, "punish_offset must be positive");
  require(static_cast<double>(punish_base) + punish_offset > 1.0, "punish_base + punish_offset must exceed 1");
  require(punish_adjust >= 0.0, "punish_adjust must be non-negative");
  require(workload_exponent > 0.0, "workload_exponent must be positive");
  require(workload_min > 0.0 && workload_min <= workload_max, "workload bounds must satisfy 0 < min <= max");
  require(initial_reputation > 0.0, "initial_reputation must be positive");
}

double apply_reputation_cap(double reputation, const ReputationParams& params) {
  if (!(reputation > 0.0)) throw DomainError("reputation must be positive");
  if (reputation <= params.cap_threshold) return reputation;
  return reputation / std::exp((reputation - params.cap_threshold) / params.decay_scale);
}

AccuracyScore accuracy_score(std::uint64_t tests_passed_total, std::span<const std::uint32_t> tests_assigned) {
  const std::uint64_t assigned = std::accumulate(tests_assigned.begin(), tests_assigned.end(), std::uint64_t{0});
  if (assigned == 0) return {};
  if (tests_passed_total > assigned) throw DomainError("passed tests exceed assigned tests");
  return {static_cast<double>(tests_passed_total) / static_cast<double>(assigned), true};
}

double reputation_weight(std::span<const double> accumulated, std::size_t index, double diversity) {
  if (accumulated.empty()) throw DomainError("reputation weight over an empty population");
  if (index >= accumulated.size()) throw DomainError("reputation weight index out of range");
  const double total = std::accumulate(accumulated.begin(), accumulated.end(), 0.0);
  if (!(total > 0.0)) throw DomainError("accumulated reputations must be positive");
  return static_cast<double>(accumulated.size()) * accumulated[index] / total * diversity;
}

double source_diversity_factor(std::size_t distinct_sources, std::size_t total_sources, std::size_t population) {
  if (total_sources == 0 || population == 0) throw DomainError("diversity needs sources and a population");
  const double f = 1.0 + (static_cast<double>(distinct_sources) / static_cast<double>(total_sources) -
                          1.0 / static_cast<double>(population));
  return std::clamp(f, 0.5, 2.0);
}

ResponseTimeScore response_time_score(std::span<const double> times, std::size_t population) {
  if (population == 0) throw DomainError("population must be positive");
  if (times.empty()) return {};
  const double n = static_cast<double>(times.size());
  const double mean = std::accumulate(times.begin(), times.end(), 0.0) / n;
  if (!(mean > 0.0)) throw DomainError("response times must be positive");
  double ss = 0.0;
  for (double t : times) ss += (t - mean) * (t - mean);
  const double cv = std::sqrt(ss / n) / mean;
  return {cv / static_cast<double>(population), true};
}

double update_reputation(double accuracy, double weight, double response_time, const ReputationParams& params,
                         double accumulated) {
  if (accuracy < 0.0 || accuracy > 1.0) throw DomainError("accuracy must lie in [0, 1]");
  if (!(accumulated > 0.0)) throw DomainError("accumulated reputation must be positive");
  const double rt =
      params.rt_orientation == RtOrientation::Literal ? response_time : 1.0 / (1.0 + response_time);
  const double multiplier =
      params.beta * accuracy + params.gamma * sigmoid(weight) + params.delta * sigmoid(rt) + 1.0;
  return multiplier * accumulated;
}

double committee_reward(std::span<const double> member_reputations, std::span<const double> contribution_weights,
                        double tasks_in_cycle, double cycle_length, const ReputationParams& params) {
  if (member_reputations.empty()) throw DomainError("committee has no members");
  if (member_reputations.size() != contribution_weights.size()) {
    throw DomainError("one contribution weight per member is required");
  }
  if (!(cycle_length > 0.0)) throw DomainError("cycle length must be positive");
  if (tasks_in_cycle < 0.0) throw DomainError("task count must be non-negative");
  double weight_total = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < member_reputations.size(); ++i) {
    if (contribution_weights[i] < 0.0) throw DomainError("contribution weights must be non-negative");
    weight_total += contribution_weights[i];
    weighted += contribution_weights[i] * member_reputations[i];
  }
  if (!(weight_total > 0.0)) throw DomainError("contribution weights are all zero");
  const double workload = std::clamp(tasks_in_cycle / cycle_length, params.workload_min, params.workload_max);
  return weighted / static_cast<double>(member_reputations.size()) * std::pow(workload, params.workload_exponent);
}

double punish(double reputation, std::uint32_t dishonest_count, const ReputationParams& params) {
  if (!(reputation > 0.0)) throw DomainError("reputation must be positive");
  const double base = static_cast<double>(params.punish_base) + params.punish_offset;
  if (!(base > 1.0)) throw DomainError("punish_base + punish_offset must exceed 1");
  return reputation / std::pow(std::log(base), static_cast<double>(dishonest_count) + params.punish_adjust);
}

}  // namespace oraclesim::reputation
