#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oraclesim {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> data);
Digest hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data);

// Big-endian fixed-width encoding used by every derived seed.
void append_u64_be(Bytes& out, std::uint64_t value);
void append_str(Bytes& out, std::string_view text);

// First eight digest bytes read as a big-endian integer.
std::uint64_t digest_prefix_u64(const Digest& digest);

std::string to_hex(std::span<const std::uint8_t> data);
Bytes from_hex(std::string_view hex);

}  // namespace oraclesim
