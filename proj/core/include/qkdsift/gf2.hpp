#pragma once

// Carryless (GF(2)[x]) polynomial multiplication on 64-bit word arrays.
// Bit i of the operand is the coefficient of z^i (LSB-first packing, as
// produced by pack_words). The product of na-word and nb-word inputs has
// na + nb words.
//
// Two kernels: a portable windowed schoolbook and a PCLMULQDQ path used
// automatically when the CPU supports it. Both produce identical output.

#include <cstdint>
#include <span>
#include <vector>

namespace qkd::gf2 {

bool has_clmul();

std::vector<std::uint64_t> carryless_mul_portable(std::span<const std::uint64_t> a,
                                                  std::span<const std::uint64_t> b);

// Dispatches to the hardware kernel when available, else to the portable one.
std::vector<std::uint64_t> carryless_mul(std::span<const std::uint64_t> a,
                                         std::span<const std::uint64_t> b);

}  // namespace qkd::gf2
