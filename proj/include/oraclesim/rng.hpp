#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "oraclesim/crypto.hpp"

namespace oraclesim {

// Every stochastic choice draws from an mt19937_64 stream whose seed is
// derived by hashing; the helpers below avoid the implementation-defined
// std distributions so traces agree across standard libraries.
using Rng = std::mt19937_64;

// round_seed = SHA-256(be64(master_seed) || be64(round_index))
Digest round_seed(std::uint64_t master_seed, std::uint64_t round_index);

// first 8 bytes (big-endian) of SHA-256(be64(master_seed) || utf8(label))
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view label);

// Independent stream for one purpose inside a round:
// seed = first 8 bytes of SHA-256(round_seed || utf8(purpose) || be64(index))
Rng stream(const Digest& round_seed, std::string_view purpose, std::uint64_t index = 0);

std::uint64_t splitmix64(std::uint64_t x);

// [0, 1) with 53 bits of precision.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

// Unbiased integer in [0, n). n must be positive.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

double standard_normal(Rng& rng);

inline double lognormal(Rng& rng, double mu, double sigma) {
  return std::exp(mu + sigma * standard_normal(rng));
}

}  // namespace oraclesim
