#include <gtest/gtest.h>
#include <omp.h>

#include <random>
#include <vector>

#include "oraclesim/kernels.hpp"

namespace oraclesim::kernels {
namespace {

class ThreadCount : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override {
    saved_ = omp_get_max_threads();
    omp_set_num_threads(GetParam());
  }
  void TearDown() override { omp_set_num_threads(saved_); }

 private:
  int saved_ = 1;
};

TEST_P(ThreadCount, CoverageHitsParallelEqualsSerial) {
  for (auto [m, n, k] : {std::tuple{500ull, 50ull, 29ull}, std::tuple{10ull, 10ull, 1ull}, std::tuple{97ull, 3ull, 40ull},
                         std::tuple{100ull, 1ull, 0ull}}) {
    for (std::uint64_t seed : {1ull, 99ull}) {
      EXPECT_EQ(coverage_hits_parallel(m, n, k, 3001, seed), coverage_hits_serial(m, n, k, 3001, seed));
    }
  }
}

TEST_P(ThreadCount, HistogramParallelEqualsSerial) {
  std::mt19937_64 gen(4);
  for (std::size_t n : {0ul, 1ul, 7ul, 1000ul, 65537ul}) {
    std::vector<double> values(n), truths(n);
    for (std::size_t i = 0; i < n; ++i) {
      truths[i] = std::uniform_real_distribution<double>(0, 100)(gen);
      values[i] = truths[i] + std::uniform_real_distribution<double>(-15, 15)(gen);
    }
    EXPECT_EQ(deviation_histogram_parallel(values, truths, 20, 10.0),
              deviation_histogram_serial(values, truths, 20, 10.0));
  }
}

INSTANTIATE_TEST_SUITE_P(Threads, ThreadCount, ::testing::Values(1, 2, 4, 7));

TEST(DeviationBin, EdgesAndOverflow) {
  EXPECT_EQ(deviation_bin(0.0, 20, 10.0), 0u);
  EXPECT_EQ(deviation_bin(0.4999, 20, 10.0), 0u);
  EXPECT_EQ(deviation_bin(0.5, 20, 10.0), 1u);
  EXPECT_EQ(deviation_bin(9.99, 20, 10.0), 19u);
  EXPECT_EQ(deviation_bin(10.0, 20, 10.0), 19u);
  EXPECT_EQ(deviation_bin(1e300, 20, 10.0), 19u);
}

TEST(Histogram, CountsEveryReport) {
  const std::vector<double> v{0, 1, 2, 30};
  const std::vector<double> t{0, 0, 0, 0};
  const auto h = deviation_histogram_serial(v, t, 4, 4.0);
  EXPECT_EQ(h, (std::vector<std::uint64_t>{1, 1, 1, 1}));
}

TEST(CoverageHits, FullSampleHitsEveryTrial) {
  EXPECT_EQ(coverage_hits_serial(10, 10, 1, 500, 3), 500u);
  EXPECT_EQ(coverage_hits_serial(10, 3, 0, 500, 3), 0u);
}

}  // namespace
}  // namespace oraclesim::kernels
