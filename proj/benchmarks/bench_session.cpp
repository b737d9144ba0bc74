#include <benchmark/benchmark.h>

#include "qkdsift/protocol.hpp"

namespace {

qkd::ProtocolConfig config(std::uint64_t n, double eps, double eta) {
    qkd::ProtocolConfig c;
    c.n_photons = n;
    c.epsilon_alice = eps;
    c.epsilon_bob = eps;
    c.e_max = 0.03;
    c.m1 = 200;
    c.m2 = 200;
    c.eta = eta;
    c.seed = 7;
    return c;
}

void BM_SessionClean(benchmark::State& state) {
    const auto c = config(static_cast<std::uint64_t>(state.range(0)), 0.5, 0.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qkd::run_session(c));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SessionClean)->Arg(10000)->Arg(100000)->Arg(1000000);

void BM_SessionNoisyBiased(benchmark::State& state) {
    const auto c = config(static_cast<std::uint64_t>(state.range(0)), 0.05, 0.005);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qkd::run_session(c));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SessionNoisyBiased)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_SessionUnderAttack(benchmark::State& state) {
    const auto c = config(static_cast<std::uint64_t>(state.range(0)), 0.1, 0.0);
    const qkd::BiasedAttackParams attack{0.0, 1.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(qkd::run_session(c, attack));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SessionUnderAttack)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace
