#pragma once

// Biased intercept-resend eavesdropping. Per photon, Eve measures in the
// rectilinear basis with probability p1, in the diagonal basis with
// probability p2, and otherwise lets the photon pass untouched. Measuring
// collapses the photon, so a wrong-basis interception randomizes what Bob
// later sees.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qkdsift/quantum.hpp"
#include "qkdsift/random.hpp"

namespace qkd {

struct BiasedAttackParams {
    double p1 = 0.0;  // probability of measuring in the rectilinear basis
    double p2 = 0.0;  // probability of measuring in the diagonal basis

    void validate() const {
        if (!(p1 >= 0.0) || !(p2 >= 0.0) || !(p1 + p2 <= 1.0)) {
            throw std::invalid_argument(
                "attack params must satisfy p1 >= 0, p2 >= 0, p1 + p2 <= 1");
        }
    }
};

enum class EveAction : std::uint8_t {
    Passed = 0,
    MeasuredRectilinear = 1,
    MeasuredDiagonal = 2,
};

struct EveRecord {
    EveAction action = EveAction::Passed;
    std::optional<Bit> observed_bit;  // present iff action != Passed
};

struct InterceptResult {
    Polarization resent;
    EveRecord record;
};

// One action draw, plus one measurement draw when Eve measures in the wrong
// basis for the photon.
inline InterceptResult intercept(Polarization photon, const BiasedAttackParams& params,
                                 RandomStream& rng) {
    const double u = rng.next_double();
    Basis eve_basis;
    EveAction action;
    if (u < params.p1) {
        eve_basis = Basis::Rectilinear;
        action = EveAction::MeasuredRectilinear;
    } else if (u < params.p1 + params.p2) {
        eve_basis = Basis::Diagonal;
        action = EveAction::MeasuredDiagonal;
    } else {
        return {photon, EveRecord{EveAction::Passed, std::nullopt}};
    }
    const Measurement m = measure(photon, eve_basis, rng);
    return {m.collapsed, EveRecord{action, m.outcome}};
}

// Fraction of positions where Eve measured in Alice's preparation basis.
// Those are the bits she knows deterministically; partial knowledge from
// wrong-basis measurements is not counted.
inline double eve_known_fraction(std::span<const EveRecord> records,
                                 std::span<const Basis> alice_bases) {
    if (records.size() != alice_bases.size()) {
        throw std::invalid_argument("eve_known_fraction: length mismatch");
    }
    if (records.empty()) {
        return 0.0;
    }
    std::size_t known = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const EveAction a = records[i].action;
        if ((a == EveAction::MeasuredRectilinear && alice_bases[i] == Basis::Rectilinear) ||
            (a == EveAction::MeasuredDiagonal && alice_bases[i] == Basis::Diagonal)) {
            ++known;
        }
    }
    return static_cast<double>(known) / static_cast<double>(records.size());
}

}  // namespace qkd
