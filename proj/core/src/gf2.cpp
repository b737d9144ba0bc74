#include "qkdsift/gf2.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define QKDSIFT_X86 1
#endif

namespace qkd::gf2 {

namespace {

// 64x64 -> 128 carryless product via a 4-bit window table for b.
struct WindowTable {
    std::uint64_t lo[16];
    std::uint64_t hi[16];

    explicit WindowTable(std::uint64_t b) {
        lo[0] = 0;
        hi[0] = 0;
        for (int v = 1; v < 16; ++v) {
            std::uint64_t plo = lo[v >> 1] << 1;
            std::uint64_t phi = (hi[v >> 1] << 1) | (lo[v >> 1] >> 63);
            if (v & 1) plo ^= b;
            lo[v] = plo;
            hi[v] = phi;
        }
    }

    void mul(std::uint64_t a, std::uint64_t& out_lo, std::uint64_t& out_hi) const {
        std::uint64_t rlo = 0, rhi = 0;
        for (int shift = 60; shift >= 0; shift -= 4) {
            rhi = (rhi << 4) | (rlo >> 60);
            rlo <<= 4;
            const unsigned v = (a >> shift) & 15u;
            rlo ^= lo[v];
            rhi ^= hi[v];
        }
        out_lo = rlo;
        out_hi = rhi;
    }
};

#ifdef QKDSIFT_X86
__attribute__((target("pclmul,sse4.1"))) void mul_clmul(std::span<const std::uint64_t> a,
                                                        std::span<const std::uint64_t> b,
                                                        std::uint64_t* out) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        const __m128i va = _mm_set_epi64x(0, static_cast<long long>(a[i]));
        for (std::size_t j = 0; j < b.size(); ++j) {
            const __m128i vb = _mm_set_epi64x(0, static_cast<long long>(b[j]));
            const __m128i p = _mm_clmulepi64_si128(va, vb, 0x00);
            out[i + j] ^= static_cast<std::uint64_t>(_mm_cvtsi128_si64(p));
            out[i + j + 1] ^= static_cast<std::uint64_t>(_mm_extract_epi64(p, 1));
        }
    }
}
#endif

}  // namespace

bool has_clmul() {
#ifdef QKDSIFT_X86
    return __builtin_cpu_supports("pclmul") && __builtin_cpu_supports("sse4.1");
#else
    return false;
#endif
}

std::vector<std::uint64_t> carryless_mul_portable(std::span<const std::uint64_t> a,
                                                  std::span<const std::uint64_t> b) {
    std::vector<std::uint64_t> out(a.size() + b.size(), 0);
    for (std::size_t j = 0; j < b.size(); ++j) {
        if (b[j] == 0) continue;
        const WindowTable table(b[j]);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0) continue;
            std::uint64_t lo, hi;
            table.mul(a[i], lo, hi);
            out[i + j] ^= lo;
            out[i + j + 1] ^= hi;
        }
    }
    return out;
}

std::vector<std::uint64_t> carryless_mul(std::span<const std::uint64_t> a,
                                         std::span<const std::uint64_t> b) {
#ifdef QKDSIFT_X86
    if (has_clmul()) {
        std::vector<std::uint64_t> out(a.size() + b.size(), 0);
        mul_clmul(a, b, out.data());
        return out;
    }
#endif
    return carryless_mul_portable(a, b);
}

}  // namespace qkd::gf2
