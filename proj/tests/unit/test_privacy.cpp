#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qkdsift/gf2.hpp"
#include "qkdsift/privacy.hpp"

using namespace qkd;

namespace {

// Independent oracle: the Toeplitz product evaluated entry by entry from
// the matrix definition, no word packing, no convolution.
BitString toeplitz_reference(const ToeplitzHash& h, const BitString& x) {
    BitString out(h.k, 0);
    for (std::size_t i = 0; i < h.k; ++i) {
        std::uint8_t acc = 0;
        for (std::size_t j = 0; j < h.n; ++j) {
            acc ^= static_cast<std::uint8_t>(h.diagonals[i + h.n - 1 - j] & x[j]);
        }
        out[i] = acc;
    }
    return out;
}

BitString random_bits(std::size_t len, RandomStream& rng) {
    BitString bits(len);
    for (auto& b : bits) b = rng.next_bit();
    return bits;
}

BitString bits_of_value(std::uint64_t value, std::size_t len) {
    BitString bits(len);
    for (std::size_t i = 0; i < len; ++i) {
        bits[i] = static_cast<std::uint8_t>((value >> i) & 1);
    }
    return bits;
}

}  // namespace

TEST_CASE("carryless multiply: small bit-level reference") {
    // (1 + z)(1 + z) = 1 + z^2 and (z^3 + 1)(z + 1) = z^4 + z^3 + z + 1.
    const std::vector<std::uint64_t> a{0b11}, b{0b11};
    CHECK(gf2::carryless_mul_portable(a, b)[0] == 0b101);
    const std::vector<std::uint64_t> c{0b1001}, d{0b11};
    CHECK(gf2::carryless_mul_portable(c, d)[0] == 0b11011);
}

TEST_CASE("carryless multiply: portable and dispatched kernels agree") {
    RandomStream rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t na = 1 + rng.uniform_below(9);
        const std::size_t nb = 1 + rng.uniform_below(9);
        std::vector<std::uint64_t> a(na), b(nb);
        for (auto& w : a) w = rng.next_u64();
        for (auto& w : b) w = rng.next_u64();
        REQUIRE(gf2::carryless_mul(a, b) == gf2::carryless_mul_portable(a, b));
    }
}

TEST_CASE("sample_toeplitz dimensions and validation") {
    RandomStream rng(1);
    const ToeplitzHash h = sample_toeplitz(8, 3, rng);
    CHECK(h.n == 8);
    CHECK(h.k == 3);
    CHECK(h.diagonals.size() == 10);
    const ToeplitzHash tiny = sample_toeplitz(1, 1, rng);
    CHECK(tiny.diagonals.size() == 1);
    CHECK_THROWS_AS(sample_toeplitz(4, 5, rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_toeplitz(4, 0, rng), std::invalid_argument);
}

TEST_CASE("sample_toeplitz draws diagonals uniformly") {
    RandomStream rng(2);
    const int draws = 100000;
    std::vector<int> counts(32, 0);
    for (int i = 0; i < draws; ++i) {
        const ToeplitzHash h = sample_toeplitz(4, 2, rng);
        unsigned cell = 0;
        for (std::size_t b = 0; b < 5; ++b) cell |= unsigned(h.diagonals[b]) << b;
        ++counts[cell];
    }
    const double expected = draws / 32.0;
    double chi2 = 0.0;
    for (const int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    // chi-square critical value, 31 degrees of freedom, significance 0.01
    CHECK(chi2 < 52.19);
}

TEST_CASE("apply_hash basics") {
    RandomStream rng(3);
    SUBCASE("zero maps to zero") {
        const ToeplitzHash h = sample_toeplitz(32, 8, rng);
        CHECK(apply_hash(h, BitString(32, 0)) == BitString(8, 0));
    }
    SUBCASE("hand-computed 1x2 product") {
        const ToeplitzHash h{2, 1, BitString{1, 1}};
        CHECK(apply_hash(h, BitString{1, 0}) == BitString{1});
        CHECK(apply_hash(h, BitString{1, 1}) == BitString{0});
    }
    SUBCASE("degenerate single-bit multiplier") {
        CHECK(apply_hash(ToeplitzHash{1, 1, BitString{1}}, BitString{1}) == BitString{1});
        CHECK(apply_hash(ToeplitzHash{1, 1, BitString{0}}, BitString{1}) == BitString{0});
    }
    SUBCASE("length mismatch throws") {
        const ToeplitzHash h = sample_toeplitz(16, 4, rng);
        CHECK_THROWS_AS(apply_hash(h, BitString(15, 0)), std::invalid_argument);
    }
}

TEST_CASE("apply_hash equals the entrywise reference on random instances") {
    RandomStream rng(4);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + rng.uniform_below(400);
        const std::size_t k = 1 + rng.uniform_below(n);
        const ToeplitzHash h = sample_toeplitz(n, k, rng);
        const BitString x = random_bits(n, rng);
        REQUIRE(apply_hash(h, x) == toeplitz_reference(h, x));
    }
}

TEST_CASE("apply_hash is linear over GF(2)") {
    RandomStream rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.uniform_below(200);
        const std::size_t k = 1 + rng.uniform_below(n);
        const ToeplitzHash h = sample_toeplitz(n, k, rng);
        const BitString x = random_bits(n, rng);
        const BitString y = random_bits(n, rng);
        BitString xy(n);
        for (std::size_t i = 0; i < n; ++i) xy[i] = x[i] ^ y[i];
        const BitString hx = apply_hash(h, x);
        const BitString hy = apply_hash(h, y);
        BitString hx_hy(k);
        for (std::size_t i = 0; i < k; ++i) hx_hy[i] = hx[i] ^ hy[i];
        REQUIRE(apply_hash(h, xy) == hx_hy);
    }
}

TEST_CASE("toeplitz family is 2-universal: exhaustive small sizes") {
    // Collision fraction over the whole family for any fixed pair x != y,
    // via linearity: h(x) = h(y) iff h(x ^ y) = 0.
    for (std::size_t n = 1; n <= 5; ++n) {
        for (std::size_t k = 1; k <= std::min<std::size_t>(n, 3); ++k) {
            const std::size_t dlen = n + k - 1;
            const std::uint64_t family = std::uint64_t{1} << dlen;
            const double bound = std::exp2(-static_cast<double>(k));
            for (std::uint64_t z = 1; z < (std::uint64_t{1} << n); ++z) {
                const BitString zbits = bits_of_value(z, n);
                std::uint64_t zero_images = 0;
                for (std::uint64_t d = 0; d < family; ++d) {
                    const ToeplitzHash h{n, k, bits_of_value(d, dlen)};
                    if (apply_hash(h, zbits) == BitString(k, 0)) ++zero_images;
                }
                REQUIRE(static_cast<double>(zero_images) / static_cast<double>(family) <=
                        bound + 1e-12);
            }
        }
    }
}

TEST_CASE("amplification plan arithmetic") {
    const AmplificationPlan p = make_plan(16, 4, 3);
    CHECK(p.out_len == 9);
    CHECK(p.viable);
    CHECK(p.eve_info_bound_bits == doctest::Approx(0.125 / std::log(2.0)).epsilon(1e-12));

    const AmplificationPlan dead = make_plan(10, 10, 1);
    CHECK(dead.out_len == -1);
    CHECK_FALSE(dead.viable);

    const AmplificationPlan free = make_plan(100, 0, 1);
    CHECK(free.out_len == 99);
    CHECK(free.viable);
}

TEST_CASE("plan sizing is monotone") {
    for (std::uint64_t l = 0; l < 20; ++l) {
        CHECK(make_plan(100, l + 1, 5).out_len == make_plan(100, l, 5).out_len - 1);
    }
    for (std::uint64_t s = 1; s < 20; ++s) {
        CHECK(make_plan(100, 10, s + 1).out_len == make_plan(100, 10, s).out_len - 1);
    }
    for (std::size_t n = 50; n < 70; ++n) {
        CHECK(make_plan(n + 1, 10, 5).out_len == make_plan(n, 10, 5).out_len + 1);
    }
}

TEST_CASE("leakage bound") {
    CHECK(leakage_bound(0.06, 1000, 0.01, 50) == 120);
    CHECK(leakage_bound(0.0, 0, 0.0, 0) == 0);
    CHECK(leakage_bound(0.06, 1000, 0.0101, 0) == 71);  // ceil rounds up
    CHECK_THROWS_AS(leakage_bound(-0.1, 10, 0.0, 0), std::invalid_argument);
}

TEST_CASE("reconcile: identical inputs lose only the revealed parities") {
    RandomStream rng(6);
    const BitString key = random_bits(128, rng);
    const ReconcileResult r = reconcile(key, key, rng);
    CHECK(r.verified);
    CHECK(r.corrected == 0);
    CHECK(r.shared_key.size() == 128 - r.parity_bits);
    CHECK(r.shared_key == r.shared_key_bob);
    // One pass of block parities (no corrections ends the pass loop) plus
    // the 64 verification rounds.
    CHECK(r.parity_bits == 128 / 64 + 64);
}

TEST_CASE("reconcile: single known error is found by hand-traceable bisection") {
    RandomStream rng(7);
    const BitString alice = random_bits(256, rng);
    BitString bob = alice;
    bob[77] ^= 1;
    ReconcileOptions opts;
    opts.initial_block = 16;
    const ReconcileResult r = reconcile(alice, bob, rng, opts);
    CHECK(r.verified);
    CHECK(r.corrected == 1);
    CHECK(r.shared_key == r.shared_key_bob);
    // Pass 1: 16 block parities, one mismatch bisected in ceil(log2 16) = 4
    // reveals. Pass 2 (permuted, doubled block): 8 clean parities. Then 64
    // clean verification rounds.
    CHECK(r.parity_bits == 16 + 4 + 8 + 64);
    CHECK(r.shared_key.size() == 256 - (16 + 4 + 8 + 64));
    CHECK(r.block_passes == 2);
}

TEST_CASE("reconcile: 10 percent mismatch is fully corrected") {
    for (const std::uint64_t seed : {100, 101, 102, 103, 104}) {
        RandomStream rng(seed);
        const std::size_t len = 1000;
        const BitString alice = random_bits(len, rng);
        BitString bob = alice;
        std::size_t flips = 0;
        for (std::size_t i = 0; i < len; ++i) {
            if (rng.bernoulli(0.1)) {
                bob[i] ^= 1;
                ++flips;
            }
        }
        ReconcileOptions opts;
        opts.initial_block = 8;
        RandomStream dialogue(seed ^ 0xabcd);
        const ReconcileResult r = reconcile(alice, bob, dialogue, opts);
        REQUIRE(r.verified);
        REQUIRE(r.shared_key == r.shared_key_bob);
        REQUIRE(r.corrected == flips);  // every correction undoes a real flip
        REQUIRE(r.shared_key.size() == len - r.parity_bits);
    }
}

TEST_CASE("reconcile rejects malformed input") {
    RandomStream rng(8);
    CHECK_THROWS_AS(reconcile(BitString{1, 0}, BitString{1}, rng), std::invalid_argument);
    CHECK_THROWS_AS(reconcile(BitString{}, BitString{}, rng), std::invalid_argument);
}

TEST_CASE("reconcile reports failure when the dialogue would leak everything") {
    // A key shorter than the verification round count cannot survive.
    RandomStream rng(9);
    const BitString key = random_bits(16, rng);
    const ReconcileResult r = reconcile(key, key, rng);
    CHECK_FALSE(r.verified);
    CHECK(r.shared_key.empty());
}

TEST_CASE("eve info bound") {
    CHECK(eve_info_bound(1) == doctest::Approx(0.5 / std::log(2.0)));
    CHECK(eve_info_bound(20) == doctest::Approx(std::exp2(-20.0) / std::log(2.0)));
}
