#include "oraclesim/kernels.hpp"

#include <cmath>
#include <numeric>

#include "oraclesim/errors.hpp"
#include "oraclesim/rng.hpp"

namespace oraclesim::kernels {
namespace {

void check_sampling(std::uint64_t population, std::uint64_t sample_size) {
  if (population == 0) throw DomainError("population must be positive");
  if (sample_size == 0 || sample_size > population) throw DomainError("sample size must be in [1, population]");
}

// One trial; `scratch` holds a permutation of [0, M) and is reused.
bool trial_hits(std::uint64_t population, std::uint64_t sample_size, std::uint64_t rounds, std::uint64_t seed,
                std::vector<std::uint32_t>& scratch) {
  Rng rng(splitmix64(seed));
  for (std::uint64_t k = 0; k < rounds; ++k) {
    // Partial Fisher-Yates: the first N slots are the sample.
    for (std::uint64_t i = 0; i < sample_size; ++i) {
      const auto j = i + uniform_index(rng, population - i);
      std::swap(scratch[i], scratch[j]);
      if (scratch[i] == 0) return true;
    }
  }
  return false;
}

void check_histogram(std::span<const double> values, std::span<const double> truths, std::uint32_t bins,
                     double range_bound) {
  if (values.size() != truths.size()) throw DomainError("values and truths differ in length");
  if (bins == 0) throw DomainError("bins must be positive");
  if (!(range_bound > 0.0)) throw DomainError("range bound must be positive");
}

}  // namespace

std::uint64_t coverage_hits_serial(std::uint64_t population, std::uint64_t sample_size, std::uint64_t rounds,
                                   std::uint64_t trials, std::uint64_t seed) {
  check_sampling(population, sample_size);
  std::vector<std::uint32_t> scratch(population);
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::iota(scratch.begin(), scratch.end(), 0u);
    if (trial_hits(population, sample_size, rounds, seed + t, scratch)) ++hits;
  }
  return hits;
}

std::uint64_t coverage_hits_parallel(std::uint64_t population, std::uint64_t sample_size, std::uint64_t rounds,
                                     std::uint64_t trials, std::uint64_t seed) {
  check_sampling(population, sample_size);
  std::uint64_t hits = 0;
  const auto n = static_cast<std::int64_t>(trials);
#pragma omp parallel reduction(+ : hits)
  {
    std::vector<std::uint32_t> scratch(population);
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < n; ++t) {
      std::iota(scratch.begin(), scratch.end(), 0u);
      if (trial_hits(population, sample_size, rounds, seed + static_cast<std::uint64_t>(t), scratch)) ++hits;
    }
  }
  return hits;
}

std::size_t deviation_bin(double deviation, std::uint32_t bins, double range_bound) {
  const double width = range_bound / bins;
  const double slot = std::floor(deviation / width);
  if (!(slot >= 0.0)) return 0;
  if (slot >= static_cast<double>(bins)) return bins - 1;
  return static_cast<std::size_t>(slot);
}

std::vector<std::uint64_t> deviation_histogram_serial(std::span<const double> values, std::span<const double> truths,
                                                      std::uint32_t bins, double range_bound) {
  check_histogram(values, truths, bins, range_bound);
  std::vector<std::uint64_t> counts(bins, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    ++counts[deviation_bin(std::fabs(values[i] - truths[i]), bins, range_bound)];
  }
  return counts;
}

std::vector<std::uint64_t> deviation_histogram_parallel(std::span<const double> values,
                                                        std::span<const double> truths, std::uint32_t bins,
                                                        double range_bound) {
  check_histogram(values, truths, bins, range_bound);
  std::vector<std::uint64_t> counts(bins, 0);
  const auto n = static_cast<std::int64_t>(values.size());
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(bins, 0);
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      ++local[deviation_bin(std::fabs(values[k] - truths[k]), bins, range_bound)];
    }
#pragma omp critical
    for (std::uint32_t b = 0; b < bins; ++b) counts[b] += local[b];
  }
  return counts;
}

}  // namespace oraclesim::kernels
