#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace oraclesim::kernels {

// Number of trials in which node 0 is drawn at least once over `rounds`
// rounds of N-of-M sampling without replacement. Trial t uses its own stream
// seeded from splitmix64(seed + t), so both variants return the same count.
std::uint64_t coverage_hits_serial(std::uint64_t population, std::uint64_t sample_size, std::uint64_t rounds,
                                   std::uint64_t trials, std::uint64_t seed);
std::uint64_t coverage_hits_parallel(std::uint64_t population, std::uint64_t sample_size, std::uint64_t rounds,
                                     std::uint64_t trials, std::uint64_t seed);

// Bin index of one absolute deviation: floor(dev / width), clamped to the last bin.
std::size_t deviation_bin(double deviation, std::uint32_t bins, double range_bound);

// Histogram of |values[i] - truths[i]|.
std::vector<std::uint64_t> deviation_histogram_serial(std::span<const double> values, std::span<const double> truths,
                                                      std::uint32_t bins, double range_bound);
std::vector<std::uint64_t> deviation_histogram_parallel(std::span<const double> values,
                                                        std::span<const double> truths, std::uint32_t bins,
                                                        double range_bound);

}  // namespace oraclesim::kernels
