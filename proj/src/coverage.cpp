#include "oraclesim/coverage.hpp"

#include <algorithm>
#include <cmath>

#include "oraclesim/errors.hpp"
#include "oraclesim/kernels.hpp"

namespace oraclesim::coverage {

namespace {

void check_sampling(std::uint64_t population, std::uint64_t sample_size) {
  if (population == 0) throw DomainError("population must be positive");
  if (sample_size == 0 || sample_size > population) {
    throw DomainError("sample size must lie in [1, population]");
  }
}

// Probability that a fixed node escapes K rounds.
long double miss_probability(std::uint64_t population, std::uint64_t sample_size, std::uint64_t rounds) {
  const long double q = 1.0L - static_cast<long double>(sample_size) / static_cast<long double>(population);
  return std::pow(q, static_cast<long double>(rounds));
}

}  // namespace

std::uint64_t rounds_for_coverage(std::uint64_t population, std::uint64_t sample_size, double confidence) {
  check_sampling(population, sample_size);
  if (!(confidence >= 0.0) || confidence >= 1.0) {
    throw DomainError("confidence must lie in [0, 1); certainty needs unbounded rounds");
  }
  if (confidence == 0.0) return 0;
  if (sample_size == population) return 1;

  const long double target = 1.0L - static_cast<long double>(confidence);
  const long double ratio =
      std::log(target) / std::log1p(-static_cast<long double>(sample_size) / static_cast<long double>(population));
  auto k = static_cast<std::uint64_t>(std::ceil(ratio));
  if (k == 0) k = 1;
  // The closed form can land one off when the ratio sits on an integer
  // boundary; settle it against the defining inequality.
  while (miss_probability(population, sample_size, k) > target) ++k;
  while (k > 1 && miss_probability(population, sample_size, k - 1) <= target) --k;
  return k;
}

std::uint64_t cycles_for_coverage(double tests_per_cycle, std::uint64_t rounds, double tx_per_second,
                                  double cycle_capacity) {
  if (!(tx_per_second > 0.0) || !(cycle_capacity > 0.0)) {
    throw DomainError("transaction rate and cycle capacity must be positive");
  }
  if (!(tests_per_cycle > 0.0)) throw DomainError("tests per cycle must be positive");
  if (rounds == 0) return 0;
  const long double value = static_cast<long double>(tests_per_cycle) * static_cast<long double>(rounds) /
                            (static_cast<long double>(tx_per_second) * static_cast<long double>(cycle_capacity));
  const long double nearest = std::nearbyint(value);
  if (std::fabs(value - nearest) <= 1e-12L * std::max(1.0L, std::fabs(value))) {
    return static_cast<std::uint64_t>(nearest);
  }
  return static_cast<std::uint64_t>(std::ceil(value));
}

CoveragePlan plan(std::uint64_t population, std::uint64_t sample_size, double confidence, double tests_per_cycle,
                  double tx_per_second, double cycle_capacity) {
  CoveragePlan p;
  p.population = population;
  p.sample_size = sample_size;
  p.confidence = confidence;
  p.tests_per_cycle = tests_per_cycle;
  p.tx_per_second = tx_per_second;
  p.cycle_capacity = cycle_capacity;
  p.rounds = rounds_for_coverage(population, sample_size, confidence);
  p.cycles = cycles_for_coverage(tests_per_cycle, p.rounds, tx_per_second, cycle_capacity);
  return p;
}

double empirical_coverage(std::uint64_t population, std::uint64_t sample_size, std::uint64_t rounds,
                          std::uint64_t trials, std::uint64_t seed) {
  check_sampling(population, sample_size);
  if (trials == 0) throw DomainError("trials must be positive");
  const auto hits = kernels::coverage_hits_parallel(population, sample_size, rounds, trials, seed);
  return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace oraclesim::coverage
