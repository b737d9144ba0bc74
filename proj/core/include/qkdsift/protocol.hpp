#pragma once

// Full-session orchestration: biased preparation, optional interception,
// channel noise, biased measurement, basis announcement, sifting, the two
// error analyses, verdicts, reconciliation and privacy amplification. A
// session is a pure function of (config, attack); the transcript records
// every stage and serializes to a stable JSON layout.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qkdsift/adversary.hpp"
#include "qkdsift/analytics.hpp"
#include "qkdsift/bitstring.hpp"
#include "qkdsift/privacy.hpp"
#include "qkdsift/quantum.hpp"

namespace qkd {

struct ProtocolConfig {
    std::uint64_t n_photons = 10000;
    double epsilon_alice = 0.5;  // probability of the rectilinear basis
    double epsilon_bob = 0.5;
    double e_max = 0.03;
    std::uint64_t m1 = 200;  // rectilinear test-sample size
    std::uint64_t m2 = 200;  // diagonal test-sample size
    std::uint64_t s = 30;    // privacy-amplification security parameter, bits
    double eta = 0.0;        // channel bit-flip probability
    std::uint64_t seed = 0;

    // Confidence level for the Hoeffding deviation folded into the leakage
    // bound; the tail 1 - stat_confidence is the allowed estimation failure.
    double stat_confidence = 1.0 - 1e-6;
    // Reconciliation first-pass block length; 0 derives it from the
    // observed error rate.
    std::size_t recon_block_len = 0;

    void validate() const;  // throws std::invalid_argument naming the field
};

struct SiftedPartition {
    std::vector<std::uint32_t> rect_indices;
    std::vector<std::uint32_t> diag_indices;
    std::vector<std::uint32_t> discarded_indices;
};

SiftedPartition sift(std::span<const Basis> alice_bases, std::span<const Basis> bob_bases);

struct ErrorEstimate {
    std::uint64_t m1 = 0, m2 = 0;
    std::uint64_t r1 = 0, r2 = 0;  // mismatches in each test sample
    double e1_hat = 0.0, e2_hat = 0.0;
    // Naive single rate: the two samples pooled with weights equal to the
    // sifted-subset sizes, which is what lumping all accepted data together
    // converges to. With equal subsets this is (r1 + r2) / (m1 + m2).
    double e_bar_hat = 0.0;
    std::vector<std::uint32_t> sample_indices;  // sacrificed, ascending
};

// Draws m1 (m2) positions uniformly without replacement from the
// rectilinear (diagonal) subset via dedicated labeled substreams of rng.
ErrorEstimate estimate_errors(const SiftedPartition& sifted, std::span<const Bit> alice_bits,
                              std::span<const Bit> bob_bits, std::uint64_t m1,
                              std::uint64_t m2, RandomStream& rng);

Verdict verdict_refined(const ErrorEstimate& estimate, double e_max);
Verdict verdict_naive(const ErrorEstimate& estimate, double e_max);

// Mismatch counts over the full sifted subsets, not just the test samples.
struct PopulationStats {
    std::uint64_t rect_errors = 0, diag_errors = 0;
    double e1 = 0.0, e2 = 0.0, e_bar = 0.0;
};

struct ReconciliationSummary {
    std::uint64_t parity_bits = 0;
    std::uint64_t corrected = 0;
    bool verified = false;
    std::size_t key_len = 0;
    std::size_t block_len = 0;
};

struct SessionTranscript {
    ProtocolConfig config;
    std::optional<BiasedAttackParams> attack;

    std::vector<Bit> alice_bits;
    std::vector<Basis> alice_bases;
    std::vector<Basis> bob_bases;
    std::vector<Bit> bob_outcomes;
    std::vector<EveRecord> eve_records;  // empty when no attack

    SiftedPartition sifted;
    std::optional<ErrorEstimate> estimate;  // absent on insufficient-sample abort
    PopulationStats population;

    Verdict verdict_refined = Verdict::Abort;
    Verdict verdict_naive = Verdict::Abort;
    std::string abort_reason;  // empty, or insufficient_{rect,diag}_sample

    BitString raw_key_alice;
    BitString raw_key_bob;

    std::optional<ReconciliationSummary> reconciliation;
    std::optional<BitString> reconciled_key;
    std::optional<std::uint64_t> leakage_bits;  // l used for plan sizing
    double delta = 0.0;                         // Hoeffding deviation folded into l
    std::optional<AmplificationPlan> plan;
    std::optional<ToeplitzHash> hash;
    std::optional<BitString> final_key;
    std::optional<double> eve_expected_info_bound;

    double sift_fraction() const {
        return n() == 0 ? 0.0
                        : static_cast<double>(sifted.rect_indices.size() +
                                              sifted.diag_indices.size()) /
                              static_cast<double>(n());
    }
    std::size_t n() const { return alice_bits.size(); }
};

SessionTranscript run_session(const ProtocolConfig& config,
                              std::optional<BiasedAttackParams> attack = std::nullopt);

// Stable-layout JSON; identical transcripts serialize to identical bytes.
std::string transcript_to_json(const SessionTranscript& transcript, int indent = -1);

// One-line human summary (verdicts, rates, sift fraction, key length).
std::string transcript_summary(const SessionTranscript& transcript);

}  // namespace qkd
