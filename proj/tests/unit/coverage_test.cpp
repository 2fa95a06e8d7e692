#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oraclesim/coverage.hpp"
#include "oraclesim/errors.hpp"

namespace oraclesim::coverage {
namespace {

// Smallest K with (1 - N/M)^K <= 1 - P by direct search.
std::uint64_t brute_rounds(std::uint64_t m, std::uint64_t n, double p) {
  const long double q = 1.0L - static_cast<long double>(n) / static_cast<long double>(m);
  long double miss = 1.0L;
  std::uint64_t k = 0;
  while (miss > 1.0L - static_cast<long double>(p)) {
    miss *= q;
    ++k;
  }
  return k;
}

TEST(RoundsForCoverage, FiveHundredNodesFiftyPerRound) { EXPECT_EQ(rounds_for_coverage(500, 50, 0.95), 29u); }

TEST(RoundsForCoverage, FullSampleNeedsOneRound) { EXPECT_EQ(rounds_for_coverage(10, 10, 0.99), 1u); }

TEST(RoundsForCoverage, ZeroConfidenceNeedsNoRounds) {
  EXPECT_EQ(rounds_for_coverage(500, 50, 0.0), 0u);
  EXPECT_EQ(rounds_for_coverage(7, 7, 0.0), 0u);
}

TEST(RoundsForCoverage, RejectsBadArguments) {
  EXPECT_THROW(rounds_for_coverage(500, 50, 1.0), DomainError);
  EXPECT_THROW(rounds_for_coverage(500, 0, 0.5), DomainError);
  EXPECT_THROW(rounds_for_coverage(500, 501, 0.5), DomainError);
  EXPECT_THROW(rounds_for_coverage(0, 0, 0.5), DomainError);
}

TEST(RoundsForCoverage, MonteCarloConfirmsTwentyNine) {
  constexpr std::uint64_t kTrials = 100000;
  EXPECT_GE(empirical_coverage(500, 50, 29, kTrials, 2024), 0.95);
  EXPECT_LT(empirical_coverage(500, 50, 28, kTrials, 2024), 0.95);
}

TEST(RoundsForCoverage, MatchesBruteForceOnRandomInputs) {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t m = 2 + gen() % 5000;
    const std::uint64_t n = 1 + gen() % (m - 1);
    const double p = std::uniform_real_distribution<double>(0.01, 0.999)(gen);
    ASSERT_EQ(rounds_for_coverage(m, n, p), brute_rounds(m, n, p)) << m << " " << n << " " << p;
  }
}

TEST(RoundsForCoverage, MonotoneInSampleSizeAndConfidence) {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 500; ++i) {
    const std::uint64_t m = 3 + gen() % 2000;
    const std::uint64_t n = 1 + gen() % (m - 2);
    const double p = std::uniform_real_distribution<double>(0.05, 0.95)(gen);
    EXPECT_GE(rounds_for_coverage(m, n, p), rounds_for_coverage(m, n + 1, p));
    EXPECT_LE(rounds_for_coverage(m, n, p), rounds_for_coverage(m, n, std::min(p + 0.04, 0.999)));
  }
}

TEST(RoundsForCoverage, TightAgainstMonteCarlo) {
  // Empirical coverage at K reaches P and at K-1 stays below it, both within
  // three binomial standard errors.
  std::mt19937_64 gen(3);
  constexpr std::uint64_t kTrials = 20000;
  for (int i = 0; i < 12; ++i) {
    const std::uint64_t m = 20 + gen() % 400;
    const std::uint64_t n = 1 + gen() % (m / 4);
    const double p = std::uniform_real_distribution<double>(0.5, 0.99)(gen);
    const auto k = rounds_for_coverage(m, n, p);
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(kTrials));
    EXPECT_GE(empirical_coverage(m, n, k, kTrials, 100 + i), p - 3.0 * sigma) << m << " " << n << " " << p;
    if (k > 0) EXPECT_LT(empirical_coverage(m, n, k - 1, kTrials, 200 + i), p + 3.0 * sigma);
  }
}

TEST(CyclesForCoverage, Examples) {
  EXPECT_EQ(cycles_for_coverage(100, 29, 1000, 1), 3u);
  EXPECT_EQ(cycles_for_coverage(12.5, 0, 3, 2), 0u);
  EXPECT_EQ(cycles_for_coverage(1, 1, 1, 1), 1u);
}

TEST(CyclesForCoverage, ExactQuotientIsNotRoundedUp) {
  // 0.1 * 30 / 3 is 1 in exact arithmetic but not in binary floating point.
  EXPECT_EQ(cycles_for_coverage(0.1, 30, 3, 1), 1u);
  EXPECT_EQ(cycles_for_coverage(0.7, 10, 7, 1), 1u);
}

TEST(CyclesForCoverage, RejectsNonPositiveRates) {
  EXPECT_THROW(cycles_for_coverage(1, 1, 0, 1), DomainError);
  EXPECT_THROW(cycles_for_coverage(1, 1, 1, -2), DomainError);
}

TEST(CyclesForCoverage, DoublingTestsDoublesCyclesUpToCeiling) {
  for (std::uint64_t k = 1; k < 60; ++k) {
    for (double x : {1.0, 3.0, 17.0, 250.0}) {
      const auto one = cycles_for_coverage(x, k, 40, 1);
      const auto two = cycles_for_coverage(2 * x, k, 40, 1);
      EXPECT_GE(two, 2 * one - 1);
      EXPECT_LE(two, 2 * one);
    }
  }
}

TEST(EmpiricalCoverage, TrivialCases) {
  EXPECT_EQ(empirical_coverage(10, 10, 1, 1000, 5), 1.0);
  EXPECT_EQ(empirical_coverage(100, 1, 0, 1000, 5), 0.0);
}

TEST(EmpiricalCoverage, DeterministicForFixedSeed) {
  EXPECT_EQ(empirical_coverage(300, 17, 9, 5000, 77), empirical_coverage(300, 17, 9, 5000, 77));
}

TEST(Plan, CombinesBothFormulas) {
  const auto p = plan(500, 50, 0.95, 100, 1000, 1);
  EXPECT_EQ(p.rounds, 29u);
  EXPECT_EQ(p.cycles, 3u);
}

}  // namespace
}  // namespace oraclesim::coverage
