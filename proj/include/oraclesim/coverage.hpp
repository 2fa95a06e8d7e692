#pragma once

#include <cstdint>

namespace oraclesim::coverage {

// Planning numbers for covert-test coverage of a node population.
struct CoveragePlan {
  std::uint64_t population = 0;      // M
  std::uint64_t sample_size = 0;     // N, nodes tested per round
  double confidence = 0.0;           // P
  std::uint64_t rounds = 0;          // K
  double tx_per_second = 1.0;        // G
  double tests_per_cycle = 1.0;      // X
  double cycle_capacity = 1.0;       // C
  std::uint64_t cycles = 0;          // N_T
};

// Smallest K with (1 - N/M)^K <= 1 - P: every node is tested at least once
// with probability >= P after K rounds of uniform N-of-M sampling.
std::uint64_t rounds_for_coverage(std::uint64_t population, std::uint64_t sample_size, double confidence);

// ceil(X * K / (G * C))
std::uint64_t cycles_for_coverage(double tests_per_cycle, std::uint64_t rounds, double tx_per_second,
                                  double cycle_capacity);

CoveragePlan plan(std::uint64_t population, std::uint64_t sample_size, double confidence, double tests_per_cycle,
                  double tx_per_second, double cycle_capacity);

// Monte Carlo estimate of the probability that a designated node is drawn at
// least once in K rounds of N-of-M sampling without replacement. Runs the
// OpenMP kernel; the value does not depend on the thread count.
double empirical_coverage(std::uint64_t population, std::uint64_t sample_size, std::uint64_t rounds,
                          std::uint64_t trials, std::uint64_t seed);

}  // namespace oraclesim::coverage
