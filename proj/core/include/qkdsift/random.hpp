#pragma once

// Deterministic counter-based random stream (Philox4x64, 10 rounds).
//
// The generator is a pure function of (key, counter): the same seed yields
// the same draw sequence on every platform and in every run, and child
// streams derived by labeled split() are keyed independently of the parent's
// draw position. Splitting never consumes parent draws, so per-purpose and
// per-trial substreams can be created in any order without perturbing
// results. Only 64-bit integer arithmetic is used.

#include <array>
#include <cstdint>
#include <string_view>

namespace qkd {

namespace detail {

// One Philox4x64-10 block evaluation. Constants are the published
// multipliers and Weyl increments for the 4x64 variant.
inline std::array<std::uint64_t, 4> philox4x64_10(std::array<std::uint64_t, 4> x,
                                                  std::array<std::uint64_t, 2> key) {
    constexpr std::uint64_t mul0 = 0xD2E7470EE14C6C93ULL;
    constexpr std::uint64_t mul1 = 0xCA5A826395121157ULL;
    constexpr std::uint64_t weyl0 = 0x9E3779B97F4A7C15ULL;
    constexpr std::uint64_t weyl1 = 0xBB67AE8584CAA73BULL;
    for (int round = 0; round < 10; ++round) {
        const auto p0 = static_cast<unsigned __int128>(mul0) * x[0];
        const auto p1 = static_cast<unsigned __int128>(mul1) * x[2];
        x = {static_cast<std::uint64_t>(p1 >> 64) ^ x[1] ^ key[0],
             static_cast<std::uint64_t>(p1),
             static_cast<std::uint64_t>(p0 >> 64) ^ x[3] ^ key[1],
             static_cast<std::uint64_t>(p0)};
        key[0] += weyl0;
        key[1] += weyl1;
    }
    return x;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace detail

class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : key_{seed, 0} {}

    std::uint64_t next_u64() {
        if (avail_ == 0) {
            block_ = detail::philox4x64_10({block_index_++, 0, 0, 0}, key_);
            avail_ = 4;
        }
        return block_[4 - avail_--];
    }

    // Uniform in [0, 1) with 53 random mantissa bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_double() < p; }

    // Uniform in [0, n). Unbiased via rejection; n must be nonzero.
    std::uint64_t uniform_below(std::uint64_t n) {
        std::uint64_t x, r;
        do {
            x = next_u64();
            r = x % n;
        } while (x - r > ~std::uint64_t{0} - (n - 1));
        return r;
    }

    std::uint8_t next_bit() { return static_cast<std::uint8_t>(next_u64() >> 63); }

    // Child stream keyed by a Philox evaluation of the parent key on a
    // label-derived counter in a reserved derivation domain (word 3 is
    // nonzero there, while draw counters always keep words 1..3 zero).
    // Pure: the same (parent, label) always gives the same child.
    RandomStream split(std::string_view label) const {
        return derive(detail::fnv1a64(label), kStringTag);
    }

    RandomStream split(std::uint64_t index) const { return derive(index, kIndexTag); }

  private:
    static constexpr std::uint64_t kDomain = 0x53504C49542F5631ULL;  // "SPLIT/V1"
    static constexpr std::uint64_t kStringTag = 1;
    static constexpr std::uint64_t kIndexTag = 2;

    RandomStream derive(std::uint64_t label, std::uint64_t tag) const {
        const auto out = detail::philox4x64_10({label, tag, 0, kDomain}, key_);
        RandomStream child{0};
        child.key_ = {out[0], out[1]};
        return child;
    }

    std::array<std::uint64_t, 2> key_;
    std::uint64_t block_index_ = 0;
    std::array<std::uint64_t, 4> block_{};
    unsigned avail_ = 0;
};

}  // namespace qkd
