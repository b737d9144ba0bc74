#include <doctest.h>

#include <cmath>
#include <vector>

#include "qkdsift/protocol.hpp"

using namespace qkd;

namespace {

ProtocolConfig base_config(std::uint64_t n, double eps, std::uint64_t seed) {
    ProtocolConfig c;
    c.n_photons = n;
    c.epsilon_alice = eps;
    c.epsilon_bob = eps;
    c.e_max = 0.03;
    c.m1 = 200;
    c.m2 = 200;
    c.s = 30;
    c.eta = 0.0;
    c.seed = seed;
    return c;
}

double binom_sigma(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

}  // namespace

TEST_CASE("config validation names the offending field") {
    ProtocolConfig c = base_config(1000, 0.5, 1);
    CHECK_NOTHROW(c.validate());
    c.epsilon_alice = 0.0;
    CHECK_THROWS_WITH_AS(c.validate(), "config: epsilon_alice must lie in (0, 0.5]",
                         std::invalid_argument);
    c = base_config(1000, 0.5, 1);
    c.epsilon_bob = 0.6;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = base_config(1000, 0.5, 1);
    c.e_max = 0.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = base_config(1000, 0.5, 1);
    c.m1 = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = base_config(1000, 0.5, 1);
    c.eta = 1.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = base_config(0, 0.5, 1);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("sift partitions all indices by basis agreement") {
    SUBCASE("perfect agreement") {
        std::vector<Basis> all_rect(100, Basis::Rectilinear);
        const SiftedPartition p = sift(all_rect, all_rect);
        CHECK(p.rect_indices.size() == 100);
        CHECK(p.diag_indices.empty());
        CHECK(p.discarded_indices.empty());
    }
    SUBCASE("explicit small case") {
        using enum Basis;
        const std::vector<Basis> alice{Rectilinear, Rectilinear, Diagonal, Diagonal};
        const std::vector<Basis> bob{Rectilinear, Diagonal, Diagonal, Rectilinear};
        const SiftedPartition p = sift(alice, bob);
        CHECK(p.rect_indices == std::vector<std::uint32_t>{0});
        CHECK(p.diag_indices == std::vector<std::uint32_t>{2});
        CHECK((p.discarded_indices == std::vector<std::uint32_t>{1, 3}));
    }
    SUBCASE("length mismatch throws") {
        const std::vector<Basis> a(3, Basis::Rectilinear), b(4, Basis::Rectilinear);
        CHECK_THROWS_AS(sift(a, b), std::invalid_argument);
    }
}

TEST_CASE("sifted fraction tracks the closed form") {
    struct Case {
        double eps;
        double expected;
    };
    for (const Case c : {Case{0.5, 0.5}, Case{0.1, 0.82}}) {
        const SessionTranscript t = run_session(base_config(1000000, c.eps, 9));
        CHECK(std::abs(t.sift_fraction() - c.expected) <
              3.0 * binom_sigma(c.expected, 1e6));
        const auto& s = t.sifted;
        CHECK(s.rect_indices.size() + s.diag_indices.size() + s.discarded_indices.size() ==
              1000000);
    }
}

TEST_CASE("estimate_errors on clean data is zero everywhere") {
    const SessionTranscript t = run_session(base_config(10000, 0.5, 3));
    REQUIRE(t.estimate.has_value());
    CHECK(t.estimate->r1 == 0);
    CHECK(t.estimate->r2 == 0);
    CHECK(t.estimate->e1_hat == 0.0);
    CHECK(t.estimate->e2_hat == 0.0);
    CHECK(t.estimate->e_bar_hat == 0.0);
    CHECK(t.estimate->sample_indices.size() == 400);
}

TEST_CASE("estimate_errors demands enough sifted data") {
    std::vector<Bit> bits(10, 0);
    std::vector<Basis> bases(10, Basis::Rectilinear);
    const SiftedPartition p = sift(bases, bases);  // all rect, diag empty
    RandomStream rng(1);
    CHECK_THROWS_AS(estimate_errors(p, bits, bits, 5, 1, rng), std::invalid_argument);
    CHECK_THROWS_AS(estimate_errors(p, bits, bits, 11, 0, rng), std::invalid_argument);
}

TEST_CASE("estimated per-basis rates converge to p2/2 and p1/2") {
    ProtocolConfig c = base_config(1000000, 0.5, 4);
    c.m1 = 2000;
    c.m2 = 2000;
    const SessionTranscript t = run_session(c, BiasedAttackParams{0.1, 0.1});
    REQUIRE(t.estimate.has_value());
    const double sigma = binom_sigma(0.05, 2000);
    CHECK(std::abs(t.estimate->e1_hat - 0.05) < 3.0 * sigma);
    CHECK(std::abs(t.estimate->e2_hat - 0.05) < 3.0 * sigma);
}

TEST_CASE("refined rates do not depend on the bias") {
    // Same attack at widely different epsilon; a two-sample z test at
    // significance 0.01 must not separate the two rectilinear estimates.
    ProtocolConfig wide = base_config(1000000, 0.5, 5);
    wide.m1 = 2000;
    wide.m2 = 2000;
    ProtocolConfig narrow = base_config(1000000, 0.05, 6);
    narrow.m1 = 2000;
    narrow.m2 = 2000;
    const BiasedAttackParams attack{0.1, 0.1};
    const SessionTranscript a = run_session(wide, attack);
    const SessionTranscript b = run_session(narrow, attack);
    const double pa = a.estimate->e1_hat;
    const double pb = b.estimate->e1_hat;
    const double pooled = (pa + pb) / 2.0;
    const double z =
        std::abs(pa - pb) / std::sqrt(pooled * (1 - pooled) * (2.0 / 2000.0));
    CHECK(z < 2.5758);  // two-sided 0.01 quantile
}

TEST_CASE("verdicts threshold strictly") {
    ErrorEstimate e;
    e.e1_hat = 0.01;
    e.e2_hat = 0.01;
    e.e_bar_hat = 0.01;
    CHECK(verdict_refined(e, 0.03) == Verdict::Accept);
    e.e2_hat = 0.045;
    CHECK(verdict_refined(e, 0.03) == Verdict::Abort);
    e.e1_hat = 0.029;
    e.e2_hat = 0.029;
    CHECK(verdict_refined(e, 0.03) == Verdict::Accept);
    e.e1_hat = 0.03;
    CHECK(verdict_refined(e, 0.03) == Verdict::Abort);  // strict inequality

    e.e_bar_hat = 0.0225;
    CHECK(verdict_naive(e, 0.03) == Verdict::Accept);
    e.e_bar_hat = 0.05;
    CHECK(verdict_naive(e, 0.03) == Verdict::Abort);
    e.e_bar_hat = 0.0;
    CHECK(verdict_naive(e, 0.001) == Verdict::Accept);
}

TEST_CASE("noiseless attack-free session accepts with identical keys") {
    ProtocolConfig c = base_config(10000, 0.5, 7);
    const SessionTranscript t = run_session(c);
    CHECK(t.verdict_refined == Verdict::Accept);
    CHECK(t.verdict_naive == Verdict::Accept);
    CHECK(t.estimate->e1_hat == 0.0);
    CHECK(t.estimate->e2_hat == 0.0);
    REQUIRE(t.raw_key_alice == t.raw_key_bob);
    CHECK(t.raw_key_alice.size() ==
          t.sifted.rect_indices.size() + t.sifted.diag_indices.size() - 400);
    REQUIRE(t.final_key.has_value());
    CHECK(t.eve_expected_info_bound.has_value());
}

TEST_CASE("diagonal-only interception at small bias fools only the naive analysis") {
    ProtocolConfig c = base_config(1000000, 0.1, 8);
    c.m1 = 500;
    c.m2 = 500;
    const SessionTranscript t = run_session(c, BiasedAttackParams{0.0, 1.0});
    REQUIRE(t.estimate.has_value());
    CHECK(t.verdict_naive == Verdict::Accept);
    CHECK(t.verdict_refined == Verdict::Abort);
    // Pooled rate sits near eps^2 / (2 [eps^2 + (1-eps)^2]) ~ 0.0061.
    CHECK(t.estimate->e_bar_hat < 0.01);
    CHECK(std::abs(t.estimate->e1_hat - 0.5) < 3.0 * binom_sigma(0.5, 500));
    CHECK_FALSE(t.final_key.has_value());
    CHECK_FALSE(t.reconciled_key.has_value());
}

TEST_CASE("nine percent diagonal interception at eps 1/2 splits the verdicts") {
    ProtocolConfig c = base_config(1000000, 0.5, 101);
    c.m1 = 1000;
    c.m2 = 1000;
    const SessionTranscript t = run_session(c, BiasedAttackParams{0.0, 0.09});
    REQUIRE(t.estimate.has_value());
    // Population rates: e1 = p2/2 = 0.045, e_bar = 0.0225.
    CHECK(std::abs(t.population.e1 - 0.045) < 3.0 * binom_sigma(0.045, 250000));
    CHECK(std::abs(t.population.e_bar - 0.0225) < 3.0 * binom_sigma(0.0225, 500000));
    CHECK(t.verdict_naive == Verdict::Accept);
    CHECK(t.verdict_refined == Verdict::Abort);
}

TEST_CASE("channel noise shows up symmetrically in both refined rates") {
    ProtocolConfig c = base_config(1000000, 0.5, 10);
    c.eta = 0.01;
    c.e_max = 0.05;
    c.m1 = 5000;
    c.m2 = 5000;
    const SessionTranscript t = run_session(c);
    const double sigma = binom_sigma(0.01, 5000);
    CHECK(std::abs(t.estimate->e1_hat - 0.01) < 3.0 * sigma);
    CHECK(std::abs(t.estimate->e2_hat - 0.01) < 3.0 * sigma);
    REQUIRE(t.final_key.has_value());
    // Reconciliation repaired every raw-key mismatch.
    REQUIRE(t.reconciliation->verified);
}

TEST_CASE("refined accept implies naive accept on the same transcript") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        RandomStream gen(seed);
        ProtocolConfig c = base_config(20000, 0.5, seed * 13 + 1);
        c.e_max = 0.001 + 0.4 * gen.next_double();
        c.eta = 0.1 * gen.next_double();
        const BiasedAttackParams attack{0.2 * gen.next_double(), 0.2 * gen.next_double()};
        const SessionTranscript t = run_session(c, attack);
        if (!t.estimate) continue;
        if (t.verdict_refined == Verdict::Accept) {
            REQUIRE(t.verdict_naive == Verdict::Accept);
        }
    }
}

TEST_CASE("insufficient sifted data aborts gracefully with a reason") {
    ProtocolConfig c = base_config(10000, 0.1, 11);
    c.m1 = 150;  // expected rect pairs: N * eps^2 = 100 < m1
    c.m2 = 10;
    const SessionTranscript t = run_session(c);
    CHECK(t.verdict_refined == Verdict::Abort);
    CHECK(t.verdict_naive == Verdict::Abort);
    CHECK(t.abort_reason == "insufficient_rect_sample");
    CHECK_FALSE(t.estimate.has_value());
    CHECK_FALSE(t.final_key.has_value());
    // Raw keys still cover every sifted position (nothing was sacrificed).
    CHECK(t.raw_key_alice.size() ==
          t.sifted.rect_indices.size() + t.sifted.diag_indices.size());
}

TEST_CASE("different alice and bob biases are supported") {
    ProtocolConfig c = base_config(200000, 0.2, 12);
    c.epsilon_bob = 0.4;
    c.m1 = 500;
    c.m2 = 500;
    const SessionTranscript t = run_session(c);
    // Agreement probability 0.2*0.4 + 0.8*0.6 = 0.56.
    CHECK(std::abs(t.sift_fraction() - 0.56) < 3.0 * binom_sigma(0.56, 200000));
    CHECK(t.verdict_refined == Verdict::Accept);
}

TEST_CASE("transcripts are byte-identical across runs") {
    ProtocolConfig c = base_config(5000, 0.25, 13);
    c.eta = 0.01;
    c.e_max = 0.05;
    c.m1 = 50;
    c.m2 = 50;
    const BiasedAttackParams attack{0.02, 0.03};
    const std::string a = transcript_to_json(run_session(c, attack));
    const std::string b = transcript_to_json(run_session(c, attack));
    CHECK(a == b);
    // And sensitive to any input change.
    c.seed ^= 1;
    CHECK(transcript_to_json(run_session(c, attack)) != a);
}

TEST_CASE("accepted sessions size the final key exactly") {
    ProtocolConfig c = base_config(100000, 0.3, 14);
    c.eta = 0.002;
    c.m1 = 400;
    c.m2 = 400;
    c.s = 40;
    const SessionTranscript t = run_session(c);
    REQUIRE(t.verdict_refined == Verdict::Accept);
    REQUIRE(t.plan.has_value());
    REQUIRE(t.final_key.has_value());
    REQUIRE(t.reconciled_key.has_value());
    const auto n = static_cast<std::int64_t>(t.reconciled_key->size());
    CHECK(t.plan->out_len == n - static_cast<std::int64_t>(*t.leakage_bits) -
                                 static_cast<std::int64_t>(c.s));
    CHECK(static_cast<std::int64_t>(t.final_key->size()) == t.plan->out_len);
    CHECK(*t.eve_expected_info_bound ==
          doctest::Approx(std::exp2(-40.0) / std::log(2.0)).epsilon(1e-12));
    // The leakage bound folds in the parity count and the Hoeffding margin.
    CHECK(*t.leakage_bits ==
          leakage_bound(2 * c.e_max, c.n_photons, t.delta, t.reconciliation->parity_bits));
}
