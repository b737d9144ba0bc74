#pragma once

// Four-state polarization alphabet with basis-dependent measurement and an
// intra-basis bit-flip channel. The discrete alphabet is exact for
// prepare-and-measure sessions with intercept-resend interference; no state
// outside these four ever occurs.

#include <cstdint>
#include <stdexcept>

#include "qkdsift/random.hpp"

namespace qkd {

using Bit = std::uint8_t;  // 0 or 1

enum class Basis : std::uint8_t { Rectilinear = 0, Diagonal = 1 };

// Encoding: bit 1 of the value selects the basis, bit 0 the key bit.
enum class Polarization : std::uint8_t {
    Horizontal = 0,  // Rectilinear, bit 0
    Vertical = 1,    // Rectilinear, bit 1
    Diag45 = 2,      // Diagonal, bit 0
    Diag135 = 3,     // Diagonal, bit 1
};

constexpr Basis conjugate(Basis b) {
    return b == Basis::Rectilinear ? Basis::Diagonal : Basis::Rectilinear;
}

constexpr Basis basis_of(Polarization p) {
    return static_cast<Basis>(static_cast<std::uint8_t>(p) >> 1);
}

constexpr Bit bit_of(Polarization p) {
    return static_cast<Bit>(static_cast<std::uint8_t>(p) & 1);
}

constexpr Polarization encode(Bit bit, Basis basis) {
    return static_cast<Polarization>((static_cast<std::uint8_t>(basis) << 1) |
                                     (bit & 1));
}

// The orthogonal state within the same basis.
constexpr Polarization flip_within_basis(Polarization p) {
    return static_cast<Polarization>(static_cast<std::uint8_t>(p) ^ 1);
}

struct Measurement {
    Bit outcome;
    Polarization collapsed;
};

// Matched-basis measurement reproduces the encoded bit and leaves the state
// untouched; mismatched-basis measurement is a fair coin and the photon
// collapses to the measured state, erasing its original polarization.
// Consumes one draw only in the mismatched case.
inline Measurement measure(Polarization photon, Basis basis, RandomStream& rng) {
    if (basis_of(photon) == basis) {
        return {bit_of(photon), photon};
    }
    const Bit outcome = rng.next_bit();
    return {outcome, encode(outcome, basis)};
}

// Flips the bit within the photon's basis with probability eta. The basis is
// always preserved. Consumes exactly one draw per call.
inline Polarization apply_noise(Polarization photon, double eta, RandomStream& rng) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw std::invalid_argument("apply_noise: eta must lie in [0, 1]");
    }
    return rng.bernoulli(eta) ? flip_within_basis(photon) : photon;
}

constexpr char basis_char(Basis b) { return b == Basis::Rectilinear ? '+' : 'x'; }

constexpr const char* polarization_name(Polarization p) {
    switch (p) {
        case Polarization::Horizontal: return "H";
        case Polarization::Vertical: return "V";
        case Polarization::Diag45: return "D45";
        case Polarization::Diag135: return "D135";
    }
    return "?";
}

}  // namespace qkd
