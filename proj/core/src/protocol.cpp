#include "qkdsift/protocol.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <utility>

#include <json.hpp>

namespace qkd {

namespace {

void fail_config(const std::string& message) {
    throw std::invalid_argument("config: " + message);
}

// Largest power of two <= 0.73 / e_obs, clamped to [8, 8192]. Small blocks
// suit noisy keys, large blocks keep leakage low on quiet ones.
std::size_t auto_block_len(double e_obs) {
    const double target = 0.73 / std::max(e_obs, 1e-4);
    std::size_t block = 8;
    while (block < 8192 && static_cast<double>(block) * 2.0 <= target) block <<= 1;
    return block;
}

std::vector<std::uint32_t> sample_without_replacement(
    const std::vector<std::uint32_t>& pool, std::uint64_t m, RandomStream rng) {
    std::vector<std::uint32_t> shuffled = pool;
    for (std::uint64_t i = 0; i < m; ++i) {
        const std::uint64_t j = i + rng.uniform_below(shuffled.size() - i);
        std::swap(shuffled[i], shuffled[j]);
    }
    shuffled.resize(m);
    std::sort(shuffled.begin(), shuffled.end());
    return shuffled;
}

std::uint64_t count_mismatches(const std::vector<std::uint32_t>& positions,
                               std::span<const Bit> a, std::span<const Bit> b) {
    std::uint64_t r = 0;
    for (const std::uint32_t i : positions) {
        if (a[i] != b[i]) ++r;
    }
    return r;
}

}  // namespace

void ProtocolConfig::validate() const {
    if (n_photons < 1) fail_config("n_photons must be >= 1");
    if (n_photons > std::numeric_limits<std::uint32_t>::max()) {
        fail_config("n_photons exceeds the supported 2^32 - 1");
    }
    if (!(epsilon_alice > 0.0 && epsilon_alice <= 0.5)) {
        fail_config("epsilon_alice must lie in (0, 0.5]");
    }
    if (!(epsilon_bob > 0.0 && epsilon_bob <= 0.5)) {
        fail_config("epsilon_bob must lie in (0, 0.5]");
    }
    if (!(e_max >= 0.0 && e_max < 0.5)) fail_config("e_max must lie in [0, 0.5)");
    if (m1 < 1) fail_config("m1 must be >= 1");
    if (m2 < 1) fail_config("m2 must be >= 1");
    if (s < 1) fail_config("s must be >= 1");
    if (!(eta >= 0.0 && eta <= 1.0)) fail_config("eta must lie in [0, 1]");
    if (!(stat_confidence > 0.0 && stat_confidence < 1.0)) {
        fail_config("stat_confidence must lie in (0, 1)");
    }
}

SiftedPartition sift(std::span<const Basis> alice_bases, std::span<const Basis> bob_bases) {
    if (alice_bases.size() != bob_bases.size()) {
        throw std::invalid_argument("sift: basis list length mismatch");
    }
    SiftedPartition out;
    for (std::size_t i = 0; i < alice_bases.size(); ++i) {
        const auto idx = static_cast<std::uint32_t>(i);
        if (alice_bases[i] != bob_bases[i]) {
            out.discarded_indices.push_back(idx);
        } else if (alice_bases[i] == Basis::Rectilinear) {
            out.rect_indices.push_back(idx);
        } else {
            out.diag_indices.push_back(idx);
        }
    }
    return out;
}

ErrorEstimate estimate_errors(const SiftedPartition& sifted, std::span<const Bit> alice_bits,
                              std::span<const Bit> bob_bits, std::uint64_t m1,
                              std::uint64_t m2, RandomStream& rng) {
    if (sifted.rect_indices.size() < m1) {
        throw std::invalid_argument("estimate_errors: rectilinear subset smaller than m1");
    }
    if (sifted.diag_indices.size() < m2) {
        throw std::invalid_argument("estimate_errors: diagonal subset smaller than m2");
    }
    ErrorEstimate est;
    est.m1 = m1;
    est.m2 = m2;
    const auto rect_sample =
        sample_without_replacement(sifted.rect_indices, m1, rng.split("sample/rect"));
    const auto diag_sample =
        sample_without_replacement(sifted.diag_indices, m2, rng.split("sample/diag"));
    est.r1 = count_mismatches(rect_sample, alice_bits, bob_bits);
    est.r2 = count_mismatches(diag_sample, alice_bits, bob_bits);
    est.e1_hat = static_cast<double>(est.r1) / static_cast<double>(m1);
    est.e2_hat = static_cast<double>(est.r2) / static_cast<double>(m2);
    const double rect_size = static_cast<double>(sifted.rect_indices.size());
    const double diag_size = static_cast<double>(sifted.diag_indices.size());
    est.e_bar_hat = (rect_size * est.e1_hat + diag_size * est.e2_hat) / (rect_size + diag_size);
    est.sample_indices.reserve(rect_sample.size() + diag_sample.size());
    std::merge(rect_sample.begin(), rect_sample.end(), diag_sample.begin(), diag_sample.end(),
               std::back_inserter(est.sample_indices));
    return est;
}

Verdict verdict_refined(const ErrorEstimate& estimate, double e_max) {
    return (estimate.e1_hat < e_max && estimate.e2_hat < e_max) ? Verdict::Accept
                                                                : Verdict::Abort;
}

Verdict verdict_naive(const ErrorEstimate& estimate, double e_max) {
    return estimate.e_bar_hat < e_max ? Verdict::Accept : Verdict::Abort;
}

SessionTranscript run_session(const ProtocolConfig& config,
                              std::optional<BiasedAttackParams> attack) {
    config.validate();
    if (attack) attack->validate();

    SessionTranscript t;
    t.config = config;
    t.attack = attack;

    const std::size_t n = config.n_photons;
    RandomStream root(config.seed);
    RandomStream alice_bit_stream = root.split("alice/bits");
    RandomStream alice_basis_stream = root.split("alice/bases");
    RandomStream bob_basis_stream = root.split("bob/bases");
    RandomStream bob_measure_stream = root.split("bob/measure");
    RandomStream eve_stream = root.split("eve");
    RandomStream noise_stream = root.split("channel/noise");
    RandomStream sample_stream = root.split("test/sample");
    RandomStream reconcile_stream = root.split("reconcile");
    RandomStream hash_stream = root.split("privacy/hash");

    t.alice_bits.resize(n);
    t.alice_bases.resize(n);
    t.bob_bases.resize(n);
    t.bob_outcomes.resize(n);
    if (attack) t.eve_records.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const Bit bit = alice_bit_stream.next_bit();
        const Basis a_basis = alice_basis_stream.bernoulli(config.epsilon_alice)
                                  ? Basis::Rectilinear
                                  : Basis::Diagonal;
        Polarization photon = encode(bit, a_basis);
        if (attack) {
            auto intercepted = intercept(photon, *attack, eve_stream);
            photon = intercepted.resent;
            t.eve_records[i] = intercepted.record;
        }
        photon = apply_noise(photon, config.eta, noise_stream);
        const Basis b_basis = bob_basis_stream.bernoulli(config.epsilon_bob)
                                  ? Basis::Rectilinear
                                  : Basis::Diagonal;
        const Measurement m = measure(photon, b_basis, bob_measure_stream);
        t.alice_bits[i] = bit;
        t.alice_bases[i] = a_basis;
        t.bob_bases[i] = b_basis;
        t.bob_outcomes[i] = m.outcome;
    }

    t.sifted = sift(t.alice_bases, t.bob_bases);
    const std::size_t rect_size = t.sifted.rect_indices.size();
    const std::size_t diag_size = t.sifted.diag_indices.size();

    t.population.rect_errors =
        count_mismatches(t.sifted.rect_indices, t.alice_bits, t.bob_outcomes);
    t.population.diag_errors =
        count_mismatches(t.sifted.diag_indices, t.alice_bits, t.bob_outcomes);
    t.population.e1 = rect_size == 0 ? 0.0
                                     : static_cast<double>(t.population.rect_errors) /
                                           static_cast<double>(rect_size);
    t.population.e2 = diag_size == 0 ? 0.0
                                     : static_cast<double>(t.population.diag_errors) /
                                           static_cast<double>(diag_size);
    t.population.e_bar =
        rect_size + diag_size == 0
            ? 0.0
            : static_cast<double>(t.population.rect_errors + t.population.diag_errors) /
                  static_cast<double>(rect_size + diag_size);

    // The protocol cannot shrink a test sample; too little sifted data in
    // either subset aborts the session outright.
    std::vector<std::uint8_t> sacrificed(n, 0);
    if (rect_size < config.m1 || diag_size < config.m2) {
        t.abort_reason = rect_size < config.m1 ? "insufficient_rect_sample"
                                               : "insufficient_diag_sample";
        t.verdict_refined = Verdict::Abort;
        t.verdict_naive = Verdict::Abort;
    } else {
        t.estimate = estimate_errors(t.sifted, t.alice_bits, t.bob_outcomes, config.m1,
                                     config.m2, sample_stream);
        for (const std::uint32_t i : t.estimate->sample_indices) sacrificed[i] = 1;
        t.verdict_refined = verdict_refined(*t.estimate, config.e_max);
        t.verdict_naive = verdict_naive(*t.estimate, config.e_max);
    }

    const std::size_t raw_len = rect_size + diag_size -
                                (t.estimate ? t.estimate->sample_indices.size() : 0);
    t.raw_key_alice.reserve(raw_len);
    t.raw_key_bob.reserve(raw_len);
    auto harvest = [&](const std::vector<std::uint32_t>& indices) {
        for (const std::uint32_t i : indices) {
            if (!sacrificed[i]) {
                t.raw_key_alice.push_back(t.alice_bits[i]);
                t.raw_key_bob.push_back(t.bob_outcomes[i]);
            }
        }
    };
    // Keys run over the unsacrificed sifted positions in photon order.
    {
        std::vector<std::uint32_t> merged;
        merged.reserve(rect_size + diag_size);
        std::merge(t.sifted.rect_indices.begin(), t.sifted.rect_indices.end(),
                   t.sifted.diag_indices.begin(), t.sifted.diag_indices.end(),
                   std::back_inserter(merged));
        harvest(merged);
    }

    if (t.verdict_refined != Verdict::Accept || t.raw_key_alice.empty()) {
        return t;
    }

    ReconcileOptions recon_opts;
    recon_opts.initial_block =
        config.recon_block_len > 0
            ? config.recon_block_len
            : auto_block_len(std::max(t.estimate->e_bar_hat,
                                      0.5 / static_cast<double>(t.raw_key_alice.size())));
    const ReconcileResult recon =
        reconcile(t.raw_key_alice, t.raw_key_bob, reconcile_stream, recon_opts);
    ReconciliationSummary summary;
    summary.parity_bits = recon.parity_bits;
    summary.corrected = recon.corrected;
    summary.verified = recon.verified;
    summary.key_len = recon.shared_key.size();
    summary.block_len = recon_opts.initial_block;
    t.reconciliation = summary;
    if (!recon.verified) {
        return t;
    }
    t.reconciled_key = recon.shared_key;

    t.delta = hoeffding_delta(std::min(config.m1, config.m2), 1.0 - config.stat_confidence);
    const std::uint64_t leakage =
        leakage_bound(2.0 * config.e_max, config.n_photons, t.delta, recon.parity_bits);
    t.leakage_bits = leakage;
    t.plan = make_plan(recon.shared_key.size(), leakage, config.s);
    if (!t.plan->viable) {
        return t;
    }
    t.hash = sample_toeplitz(recon.shared_key.size(),
                             static_cast<std::size_t>(t.plan->out_len), hash_stream);
    t.final_key = apply_hash(*t.hash, recon.shared_key);
    t.eve_expected_info_bound = t.plan->eve_info_bound_bits;
    return t;
}

namespace {

using ordered_json = nlohmann::ordered_json;

std::string bits_hex(std::span<const Bit> bits) { return to_hex_msb(bits); }

std::string bases_hex(std::span<const Basis> bases) {
    BitString bits(bases.size());
    for (std::size_t i = 0; i < bases.size(); ++i) {
        bits[i] = static_cast<std::uint8_t>(bases[i]);
    }
    return to_hex_msb(bits);
}

ordered_json config_json(const ProtocolConfig& c) {
    ordered_json j;
    j["n_photons"] = c.n_photons;
    j["epsilon_alice"] = c.epsilon_alice;
    j["epsilon_bob"] = c.epsilon_bob;
    j["e_max"] = c.e_max;
    j["m1"] = c.m1;
    j["m2"] = c.m2;
    j["s"] = c.s;
    j["eta"] = c.eta;
    j["seed"] = c.seed;
    j["stat_confidence"] = c.stat_confidence;
    j["recon_block_len"] = c.recon_block_len;
    return j;
}

}  // namespace

std::string transcript_to_json(const SessionTranscript& t, int indent) {
    ordered_json j;
    j["schema"] = "qkdsift.transcript/1";
    j["config"] = config_json(t.config);
    if (t.attack) {
        j["attack"] = ordered_json{{"p1", t.attack->p1}, {"p2", t.attack->p2}};
    } else {
        j["attack"] = nullptr;
    }
    j["alice_bits"] = bits_hex(t.alice_bits);
    j["alice_bases"] = bases_hex(t.alice_bases);
    j["bob_bases"] = bases_hex(t.bob_bases);
    j["bob_outcomes"] = bits_hex(t.bob_outcomes);
    if (t.attack) {
        std::string actions(t.eve_records.size(), 'P');
        std::string observed(t.eve_records.size(), '-');
        for (std::size_t i = 0; i < t.eve_records.size(); ++i) {
            switch (t.eve_records[i].action) {
                case EveAction::Passed: break;
                case EveAction::MeasuredRectilinear: actions[i] = 'R'; break;
                case EveAction::MeasuredDiagonal: actions[i] = 'D'; break;
            }
            if (t.eve_records[i].observed_bit) {
                observed[i] = *t.eve_records[i].observed_bit ? '1' : '0';
            }
        }
        j["eve_records"] = ordered_json{{"actions", actions}, {"observed_bits", observed}};
    } else {
        j["eve_records"] = nullptr;
    }
    {
        std::string classes(t.n(), 'x');
        for (const std::uint32_t i : t.sifted.rect_indices) classes[i] = 'r';
        for (const std::uint32_t i : t.sifted.diag_indices) classes[i] = 'd';
        j["sifted"] = ordered_json{{"rect_count", t.sifted.rect_indices.size()},
                                   {"diag_count", t.sifted.diag_indices.size()},
                                   {"discarded_count", t.sifted.discarded_indices.size()},
                                   {"classes", classes}};
    }
    if (t.estimate) {
        const auto& e = *t.estimate;
        j["estimate"] = ordered_json{{"m1", e.m1},
                                     {"m2", e.m2},
                                     {"r1", e.r1},
                                     {"r2", e.r2},
                                     {"e1_hat", e.e1_hat},
                                     {"e2_hat", e.e2_hat},
                                     {"e_bar_hat", e.e_bar_hat},
                                     {"sample_indices", e.sample_indices}};
    } else {
        j["estimate"] = nullptr;
    }
    j["population"] = ordered_json{{"rect_errors", t.population.rect_errors},
                                   {"diag_errors", t.population.diag_errors},
                                   {"e1", t.population.e1},
                                   {"e2", t.population.e2},
                                   {"e_bar", t.population.e_bar}};
    j["verdict_refined"] = to_string(t.verdict_refined);
    j["verdict_naive"] = to_string(t.verdict_naive);
    j["abort_reason"] = t.abort_reason.empty() ? ordered_json(nullptr)
                                               : ordered_json(t.abort_reason);
    j["raw_key_len"] = t.raw_key_alice.size();
    j["raw_key_alice"] = bits_hex(t.raw_key_alice);
    j["raw_key_bob"] = bits_hex(t.raw_key_bob);
    if (t.reconciliation) {
        j["reconciliation"] = ordered_json{{"parity_bits", t.reconciliation->parity_bits},
                                           {"corrected", t.reconciliation->corrected},
                                           {"verified", t.reconciliation->verified},
                                           {"key_len", t.reconciliation->key_len},
                                           {"block_len", t.reconciliation->block_len}};
    } else {
        j["reconciliation"] = nullptr;
    }
    j["reconciled_key"] = t.reconciled_key ? ordered_json(bits_hex(*t.reconciled_key))
                                           : ordered_json(nullptr);
    j["delta"] = t.leakage_bits ? ordered_json(t.delta) : ordered_json(nullptr);
    j["leakage_bits"] = t.leakage_bits ? ordered_json(*t.leakage_bits) : ordered_json(nullptr);
    if (t.plan) {
        j["plan"] = ordered_json{{"n", t.plan->n},
                                 {"leakage", t.plan->leakage},
                                 {"s", t.plan->s},
                                 {"out_len", t.plan->out_len},
                                 {"viable", t.plan->viable}};
    } else {
        j["plan"] = nullptr;
    }
    if (t.hash) {
        j["toeplitz"] = ordered_json{{"n", t.hash->n},
                                     {"k", t.hash->k},
                                     {"diagonals", to_hex_msb(t.hash->diagonals)}};
    } else {
        j["toeplitz"] = nullptr;
    }
    j["final_key_len"] = t.final_key ? ordered_json(t.final_key->size()) : ordered_json(nullptr);
    j["final_key"] = t.final_key ? ordered_json(bits_hex(*t.final_key)) : ordered_json(nullptr);
    j["eve_expected_info_bound"] =
        t.eve_expected_info_bound ? ordered_json(*t.eve_expected_info_bound)
                                  : ordered_json(nullptr);
    return j.dump(indent);
}

std::string transcript_summary(const SessionTranscript& t) {
    char buf[320];
    const double e1 = t.estimate ? t.estimate->e1_hat : 0.0;
    const double e2 = t.estimate ? t.estimate->e2_hat : 0.0;
    const double eb = t.estimate ? t.estimate->e_bar_hat : 0.0;
    std::snprintf(buf, sizeof(buf),
                  "refined=%s naive=%s e1_hat=%.6g e2_hat=%.6g e_bar_hat=%.6g "
                  "sift_fraction=%.6g raw_key_len=%zu final_key_len=%zu seed=%llu%s%s",
                  to_string(t.verdict_refined), to_string(t.verdict_naive), e1, e2, eb,
                  t.sift_fraction(), t.raw_key_alice.size(),
                  t.final_key ? t.final_key->size() : std::size_t{0},
                  static_cast<unsigned long long>(t.config.seed),
                  t.abort_reason.empty() ? "" : " abort_reason=",
                  t.abort_reason.c_str());
    return std::string(buf);
}

}  // namespace qkd
