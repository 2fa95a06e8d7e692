#include "oraclesim/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace oraclesim {

Digest round_seed(std::uint64_t master_seed, std::uint64_t round_index) {
  Bytes buf;
  append_u64_be(buf, master_seed);
  append_u64_be(buf, round_index);
  return sha256(buf);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view label) {
  Bytes buf;
  append_u64_be(buf, master_seed);
  append_str(buf, label);
  return digest_prefix_u64(sha256(buf));
}

Rng stream(const Digest& round_seed, std::string_view purpose, std::uint64_t index) {
  Bytes buf(round_seed.begin(), round_seed.end());
  append_str(buf, purpose);
  append_u64_be(buf, index);
  return Rng(digest_prefix_u64(sha256(buf)));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  // Rejection on the top of the range keeps every residue equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

double standard_normal(Rng& rng) {
  // Box-Muller, cosine branch only; 1 - u keeps the log argument positive.
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace oraclesim
