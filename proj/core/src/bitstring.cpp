#include "qkdsift/bitstring.hpp"

#include <stdexcept>

namespace qkd {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
}  // namespace

std::string to_hex_msb(std::span<const std::uint8_t> bits) {
    std::string out;
    out.reserve((bits.size() + 3) / 4);
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        unsigned nibble = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            nibble <<= 1;
            if (i + j < bits.size()) nibble |= bits[i + j] & 1;
        }
        out.push_back(kHexDigits[nibble]);
    }
    return out;
}

BitString from_hex_msb(std::string_view hex, std::size_t bit_len) {
    if (hex.size() != (bit_len + 3) / 4) {
        throw std::invalid_argument("from_hex_msb: hex length does not match bit_len");
    }
    BitString out(bit_len);
    for (std::size_t d = 0; d < hex.size(); ++d) {
        const int v = hex_value(hex[d]);
        if (v < 0) throw std::invalid_argument("from_hex_msb: non-hex character");
        for (std::size_t j = 0; j < 4; ++j) {
            const std::uint8_t bit = static_cast<std::uint8_t>((v >> (3 - j)) & 1);
            const std::size_t i = 4 * d + j;
            if (i < bit_len) {
                out[i] = bit;
            } else if (bit != 0) {
                throw std::invalid_argument("from_hex_msb: nonzero padding bits");
            }
        }
    }
    return out;
}

std::vector<std::uint64_t> pack_words(std::span<const std::uint8_t> bits) {
    std::vector<std::uint64_t> words((bits.size() + 63) / 64, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] & 1) words[i >> 6] |= std::uint64_t{1} << (i & 63);
    }
    return words;
}

BitString unpack_words(std::span<const std::uint64_t> words, std::size_t bit_len) {
    BitString out(bit_len);
    for (std::size_t i = 0; i < bit_len; ++i) {
        out[i] = static_cast<std::uint8_t>((words[i >> 6] >> (i & 63)) & 1);
    }
    return out;
}

}  // namespace qkd
