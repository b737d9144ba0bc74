#pragma once

// Bit strings are stored one bit per byte (values 0/1) for straightforward
// indexing in the protocol code; the GF(2) kernels pack them into 64-bit
// words on demand. Hex serialization is most-significant-bit first: bit 0 of
// the string is the high bit of the first hex digit, and a final partial
// digit is padded with zero bits.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qkd {

using BitString = std::vector<std::uint8_t>;

std::string to_hex_msb(std::span<const std::uint8_t> bits);

// Inverse of to_hex_msb. bit_len selects how many leading bits of the hex
// payload are meaningful; throws if the hex is too short, contains non-hex
// characters, or has nonzero padding bits.
BitString from_hex_msb(std::string_view hex, std::size_t bit_len);

// LSB-first word packing: bit i lands in word i/64 at position i%64.
std::vector<std::uint64_t> pack_words(std::span<const std::uint8_t> bits);
BitString unpack_words(std::span<const std::uint64_t> words, std::size_t bit_len);

inline std::uint8_t parity(std::span<const std::uint8_t> bits) {
    std::uint8_t p = 0;
    for (std::uint8_t b : bits) p ^= b;
    return static_cast<std::uint8_t>(p & 1);
}

}  // namespace qkd
