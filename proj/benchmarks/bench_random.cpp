#include <benchmark/benchmark.h>

#include "qkdsift/random.hpp"

namespace {

void BM_NextU64(benchmark::State& state) {
    qkd::RandomStream rng(1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rng.next_u64());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NextU64);

void BM_NextDouble(benchmark::State& state) {
    qkd::RandomStream rng(1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rng.next_double());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NextDouble);

void BM_Split(benchmark::State& state) {
    qkd::RandomStream rng(1);
    std::uint64_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rng.split(i++));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Split);

}  // namespace
