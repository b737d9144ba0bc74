#pragma once

// Reconciliation and privacy amplification.
//
// Amplification hashes the n-bit reconciled key to n - l - s bits with a
// binary Toeplitz matrix drawn uniformly from its 2-universal family; the
// listener's expected information on the result is below 2^-s / ln 2 bits.
// Reconciliation is a parity-block bisection dialogue with exact leakage
// accounting: every parity either side reveals is counted, and one key bit
// is discarded per revealed parity.

#include <cstdint>
#include <vector>

#include "qkdsift/bitstring.hpp"
#include "qkdsift/random.hpp"

namespace qkd {

// Matrix entry (i, j) = diagonals[i - j + n - 1], i < k rows, j < n columns.
struct ToeplitzHash {
    std::size_t n = 0;    // input length, bits
    std::size_t k = 0;    // output length, bits
    BitString diagonals;  // length n + k - 1
};

ToeplitzHash sample_toeplitz(std::size_t n, std::size_t k, RandomStream& rng);

// Matrix-vector product over GF(2); |x| must equal h.n. Linear in x.
BitString apply_hash(const ToeplitzHash& h, const BitString& x);

struct AmplificationPlan {
    std::size_t n = 0;
    std::uint64_t leakage = 0;
    std::uint64_t s = 0;
    std::int64_t out_len = 0;  // n - l - s, may be negative
    bool viable = false;       // out_len >= 1
    double eve_info_bound_bits = 0.0;
};

// out_len is computed exactly as n - l - s and never clamped; callers must
// check `viable` before hashing.
AmplificationPlan make_plan(std::size_t n, std::uint64_t leakage, std::uint64_t s);

// Eve's expected-information bound for security parameter s: 2^-s / ln 2.
double eve_info_bound(std::uint64_t s);

// Deterministic-information leakage bound used for plan sizing:
//   ceil(N * (eve_fraction_cap + delta)) + parity_bits.
// With the refined thresholds e1, e2 < e_max the matched-basis interception
// probabilities obey p1, p2 < 2*e_max, so callers pass cap = 2*e_max.
std::uint64_t leakage_bound(double eve_fraction_cap, std::uint64_t n_photons,
                            double delta, std::uint64_t parity_bits);

struct ReconcileOptions {
    std::size_t initial_block = 64;  // pass p uses block size initial_block << p
    int max_block_passes = 32;       // passes stop early once one corrects nothing
    int verify_rounds = 64;  // consecutive clean random-subset parities required
};

struct ReconcileResult {
    BitString shared_key;      // Alice's output; empty when !verified
    BitString shared_key_bob;  // Bob's output, equal to Alice's on success
    std::uint64_t parity_bits = 0;  // every parity revealed by either side
    std::uint64_t corrected = 0;    // positions flipped on Bob's side
    int block_passes = 0;
    bool verified = false;
};

// Makes Bob's key equal to Alice's by comparing block parities and bisecting
// mismatching blocks. The first pass runs in natural order; later passes
// permute positions and double the block size, and the pass loop stops once
// a pass corrects nothing. Random-subset verification rounds follow; a
// mismatching round is itself bisected to locate one more error, and the
// clean-round count restarts. Success requires verify_rounds consecutive
// clean subsets, which leaves any residual difference with probability at
// most 2^-verify_rounds. The returned key is truncated by one bit per
// revealed parity; if the parities ever reach the key length the dialogue
// has leaked everything and the result is unverified with no key.
ReconcileResult reconcile(const BitString& alice_key, const BitString& bob_key,
                          RandomStream& rng, const ReconcileOptions& options = {});

}  // namespace qkd
