#include <benchmark/benchmark.h>

#include "qkdsift/privacy.hpp"

namespace {

qkd::BitString random_bits(std::size_t len, qkd::RandomStream& rng) {
    qkd::BitString bits(len);
    for (auto& b : bits) b = rng.next_bit();
    return bits;
}

void BM_ToeplitzApply(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const std::size_t k = n * 3 / 4;
    qkd::RandomStream rng(3);
    const auto h = qkd::sample_toeplitz(n, k, rng);
    const auto x = random_bits(n, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qkd::apply_hash(h, x));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ToeplitzApply)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

void BM_Reconcile(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const double error_rate = static_cast<double>(state.range(1)) / 1000.0;
    qkd::RandomStream rng(4);
    const auto alice = random_bits(n, rng);
    auto bob = alice;
    for (std::size_t i = 0; i < n; ++i) {
        if (rng.bernoulli(error_rate)) bob[i] ^= 1;
    }
    for (auto _ : state) {
        qkd::RandomStream dialogue(11);
        benchmark::DoNotOptimize(qkd::reconcile(alice, bob, dialogue));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Reconcile)
    ->Args({1 << 16, 5})
    ->Args({1 << 20, 5})
    ->Args({1 << 16, 100})
    ->Unit(benchmark::kMillisecond);

}  // namespace
