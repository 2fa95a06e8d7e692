#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>

namespace oraclesim::reputation {

// How the response-time score enters the sigmoid. `Literal` feeds CV/N as is,
// which rewards dispersion; `Inverted` feeds 1 / (1 + CV/N) instead.
enum class RtOrientation : std::uint8_t { Literal, Inverted };

std::string_view to_string(RtOrientation o);
RtOrientation rt_orientation_from_string(std::string_view s);

struct ReputationParams {
  double cap_threshold = 1000.0;   // Phi
  double decay_scale = 200.0;      // lambda
  double beta = 0.5;               // accuracy weight
  double gamma = 0.3;              // reputation-weight weight
  double delta = 0.2;              // response-time weight
  double diversity = 1.0;          // Delta_diversity, neutral by default
  bool diversity_from_sources = false;
  std::uint32_t punish_base = 9;   // mu
  double punish_offset = 1.0;      // epsilon
  double punish_adjust = 0.0;      // eta
  double workload_exponent = 1.0;  // rho
  double workload_min = 0.5;       // psi_min
  double workload_max = 2.0;       // psi_max
  RtOrientation rt_orientation = RtOrientation::Literal;
  double initial_reputation = 100.0;

  // Throws DomainError naming the first violated constraint.
  void validate() const;
};

inline double sigmoid(double x) {
  // Split by sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double apply_reputation_cap(double reputation, const ReputationParams& params);

struct AccuracyScore {
  double value = 0.0;
  bool tested = false;
};

// sum(passed) / sum(assigned); a never-tested node scores 0.
AccuracyScore accuracy_score(std::uint64_t tests_passed_total, std::span<const std::uint32_t> tests_assigned);

// N * R_acc[index] / sum(R_acc) * diversity
double reputation_weight(std::span<const double> accumulated, std::size_t index, double diversity);

// Optional diversity factor: 1 + (distinct / total - 1/N), clamped to [0.5, 2].
double source_diversity_factor(std::size_t distinct_sources, std::size_t total_sources, std::size_t population);

struct ResponseTimeScore {
  double value = 0.0;
  bool has_history = false;
};

// Coefficient of variation (population standard deviation over mean) / N.
ResponseTimeScore response_time_score(std::span<const double> times, std::size_t population);

// (beta*AC + gamma*sig(RW) + delta*sig(RT') + 1) * R_acc, with RT' per the
// configured orientation. The reputation cap is applied by the caller.
double update_reputation(double accuracy, double weight, double response_time, const ReputationParams& params,
                         double accumulated);

// (sum(w_i * R_i) / N) * clamp(D / cyc, psi_min, psi_max)^rho, weights as given.
double committee_reward(std::span<const double> member_reputations, std::span<const double> contribution_weights,
                        double tasks_in_cycle, double cycle_length, const ReputationParams& params);

// R / ln(mu + eps)^(d + eta)
double punish(double reputation, std::uint32_t dishonest_count, const ReputationParams& params);

}  // namespace oraclesim::reputation
