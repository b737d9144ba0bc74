#include "qkdsift/privacy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "qkdsift/gf2.hpp"

namespace qkd {

ToeplitzHash sample_toeplitz(std::size_t n, std::size_t k, RandomStream& rng) {
    if (k < 1 || k > n) {
        throw std::invalid_argument("sample_toeplitz requires 1 <= k <= n");
    }
    const std::size_t len = n + k - 1;
    BitString diagonals(len);
    for (std::size_t base = 0; base < len; base += 64) {
        const std::uint64_t w = rng.next_u64();
        for (std::size_t j = 0; j < 64 && base + j < len; ++j) {
            diagonals[base + j] = static_cast<std::uint8_t>((w >> j) & 1);
        }
    }
    return ToeplitzHash{n, k, std::move(diagonals)};
}

// Row i of the matrix reads the diagonal string backwards from position
// n-1+i, so output bit i is coefficient n-1+i of the carryless product
// x(z) * d(z). One polynomial multiplication computes the whole image.
BitString apply_hash(const ToeplitzHash& h, const BitString& x) {
    if (h.n < 1 || h.k < 1 || h.k > h.n || h.diagonals.size() != h.n + h.k - 1) {
        throw std::invalid_argument("apply_hash: malformed Toeplitz description");
    }
    if (x.size() != h.n) {
        throw std::invalid_argument("apply_hash: input length does not match n");
    }
    const auto xw = pack_words(x);
    const auto dw = pack_words(h.diagonals);
    const auto product = gf2::carryless_mul(xw, dw);
    BitString out(h.k);
    for (std::size_t i = 0; i < h.k; ++i) {
        const std::size_t m = h.n - 1 + i;
        out[i] = static_cast<std::uint8_t>((product[m >> 6] >> (m & 63)) & 1);
    }
    return out;
}

double eve_info_bound(std::uint64_t s) {
    if (s < 1) throw std::invalid_argument("eve_info_bound requires s >= 1");
    return std::exp2(-static_cast<double>(s)) / std::log(2.0);
}

AmplificationPlan make_plan(std::size_t n, std::uint64_t leakage, std::uint64_t s) {
    if (n < 1 || s < 1) {
        throw std::invalid_argument("make_plan requires n >= 1 and s >= 1");
    }
    AmplificationPlan plan;
    plan.n = n;
    plan.leakage = leakage;
    plan.s = s;
    plan.out_len = static_cast<std::int64_t>(n) - static_cast<std::int64_t>(leakage) -
                   static_cast<std::int64_t>(s);
    plan.viable = plan.out_len >= 1;
    plan.eve_info_bound_bits = eve_info_bound(s);
    return plan;
}

std::uint64_t leakage_bound(double eve_fraction_cap, std::uint64_t n_photons,
                            double delta, std::uint64_t parity_bits) {
    if (!(eve_fraction_cap >= 0.0) || !(delta >= 0.0)) {
        throw std::invalid_argument("leakage_bound: negative inputs");
    }
    const double info = static_cast<double>(n_photons) * (eve_fraction_cap + delta);
    return static_cast<std::uint64_t>(std::ceil(info)) + parity_bits;
}

namespace {

std::uint8_t parity_at(const BitString& bits, const std::vector<std::uint32_t>& positions,
                       std::size_t lo, std::size_t hi) {
    std::uint8_t p = 0;
    for (std::size_t i = lo; i < hi; ++i) p ^= bits[positions[i]];
    return static_cast<std::uint8_t>(p & 1);
}

// Locates one differing position among positions[lo, hi) (which must hold an
// odd number of differences), flips it on `work`, and counts the parities
// revealed along the way. Returns the fixed position.
std::uint32_t bisect_and_fix(const BitString& ref, BitString& work,
                             const std::vector<std::uint32_t>& positions, std::size_t lo,
                             std::size_t hi, std::uint64_t& leak) {
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        ++leak;
        if (parity_at(ref, positions, lo, mid) != parity_at(work, positions, lo, mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    work[positions[lo]] ^= 1;
    return positions[lo];
}

}  // namespace

ReconcileResult reconcile(const BitString& alice_key, const BitString& bob_key,
                          RandomStream& rng, const ReconcileOptions& options) {
    if (alice_key.size() != bob_key.size()) {
        throw std::invalid_argument("reconcile: key length mismatch");
    }
    const std::size_t n = alice_key.size();
    if (n == 0) throw std::invalid_argument("reconcile: empty keys");
    if (options.initial_block < 1 || options.max_block_passes < 1 ||
        options.verify_rounds < 1) {
        throw std::invalid_argument("reconcile: malformed options");
    }

    const BitString& ref = alice_key;
    BitString work = bob_key;
    ReconcileResult result;
    std::uint64_t& leak = result.parity_bits;
    const std::uint64_t budget = n;  // can never discard more bits than exist

    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);

    std::size_t block = std::min(options.initial_block, n);
    for (int pass = 0; pass < options.max_block_passes; ++pass) {
        if (pass > 0) {
            for (std::size_t i = n - 1; i > 0; --i) {
                const std::size_t j = rng.uniform_below(i + 1);
                std::swap(order[i], order[j]);
            }
            if (block < n) block *= 2;
        }
        std::uint64_t corrected_this_pass = 0;
        for (std::size_t lo = 0; lo < n; lo += block) {
            const std::size_t hi = std::min(lo + block, n);
            if (leak >= budget) return result;
            ++leak;
            if (parity_at(ref, order, lo, hi) != parity_at(work, order, lo, hi)) {
                bisect_and_fix(ref, work, order, lo, hi, leak);
                ++corrected_this_pass;
            }
        }
        result.corrected += corrected_this_pass;
        result.block_passes = pass + 1;
        if (corrected_this_pass == 0) break;
    }

    // Verification doubles as a last correction stage: a mismatching subset
    // holds an odd number of residual errors, so bisecting it fixes one.
    // Subset parities are compared on word-packed copies; positions are only
    // materialized for the rare mismatching round.
    auto ref_words = pack_words(ref);
    auto work_words = pack_words(work);
    const std::size_t n_words = ref_words.size();
    std::vector<std::uint64_t> mask(n_words);
    const std::uint64_t tail =
        (n % 64) ? ((std::uint64_t{1} << (n % 64)) - 1) : ~std::uint64_t{0};
    std::vector<std::uint32_t> subset;
    int clean = 0;
    while (clean < options.verify_rounds) {
        if (leak >= budget) return result;
        bool empty = true;
        unsigned mismatch = 0;
        for (std::size_t w = 0; w < n_words; ++w) {
            std::uint64_t m = rng.next_u64();
            if (w == n_words - 1) m &= tail;
            mask[w] = m;
            empty = empty && m == 0;
            mismatch ^= static_cast<unsigned>(
                __builtin_parityll((ref_words[w] ^ work_words[w]) & m));
        }
        if (empty) continue;  // reveals nothing
        ++leak;
        if (mismatch == 0) {
            ++clean;
            continue;
        }
        clean = 0;
        if (leak >= budget) return result;
        subset.clear();
        for (std::size_t w = 0; w < n_words; ++w) {
            for (std::uint64_t m = mask[w]; m != 0; m &= m - 1) {
                subset.push_back(
                    static_cast<std::uint32_t>(64 * w + std::countr_zero(m)));
            }
        }
        const std::uint32_t fixed = bisect_and_fix(ref, work, subset, 0, subset.size(), leak);
        ++result.corrected;
        work_words[fixed >> 6] ^= std::uint64_t{1} << (fixed & 63);
    }

    if (leak >= n) return result;  // nothing left after discards
    const auto keep = static_cast<std::ptrdiff_t>(n - leak);
    result.shared_key.assign(ref.begin(), ref.begin() + keep);
    result.shared_key_bob.assign(work.begin(), work.begin() + keep);
    result.verified = true;
    return result;
}

}  // namespace qkd
