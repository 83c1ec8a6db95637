#include <benchmark/benchmark.h>

#include <cstdint>

#include "cforge/forge.hpp"
#include "cforge/lucas.hpp"
#include "cforge/ntheory.hpp"
#include "cforge/rng.hpp"

using cforge::BigInt;

namespace {

// deterministic odd modulus of the requested bit length
BigInt odd_modulus(int bits) {
    cforge::Rng rng(0xbe7c4);
    BigInt m = 1;
    for (int i = 1; i < bits; ++i) {
        m <<= 1;
        m += static_cast<unsigned long>(rng.bounded(2));
    }
    m |= 1;
    return m;
}

void bm_mod_pow(benchmark::State& state) {
    int bits = static_cast<int>(state.range(0));
    BigInt n = odd_modulus(bits);
    BigInt base = n / 3;
    BigInt exp = n - 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cforge::mod_pow(base, exp, n));
    }
}
BENCHMARK(bm_mod_pow)->Arg(64)->Arg(350)->Arg(1024);

void bm_miller_rabin_round(benchmark::State& state) {
    int bits = static_cast<int>(state.range(0));
    BigInt n = odd_modulus(bits);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cforge::miller_rabin(n, 2));
    }
}
BENCHMARK(bm_miller_rabin_round)->Arg(64)->Arg(350)->Arg(1024);

void bm_lucas_uv(benchmark::State& state) {
    int bits = static_cast<int>(state.range(0));
    BigInt n = odd_modulus(bits);
    BigInt k = n + 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cforge::lucas_uv(1, -1, k, n));
    }
}
BENCHMARK(bm_lucas_uv)->Arg(64)->Arg(350)->Arg(1024);

void bm_candidate_stream(benchmark::State& state) {
    cforge::ConstructionParams params;
    params.k_lo = params.k_hi = 3;
    params.M_lo = params.M_hi = 5;
    params.target_bits = static_cast<int>(state.range(0));
    params.seed = 11;
    params.bias = true;
    std::uint64_t produced = 0;
    for (auto _ : state) {
        auto stream = cforge::candidate_stream(params, 3, 5);
        for (int i = 0; i < 64; ++i) {
            auto c = stream.next();
            if (!c) break;
            benchmark::DoNotOptimize(*c);
            ++produced;
        }
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(produced));
}
BENCHMARK(bm_candidate_stream)->Arg(60)->Arg(350);

void bm_forge_throughput(benchmark::State& state) {
    cforge::ConstructionParams params;
    params.k_lo = 2;
    params.k_hi = 50;
    params.M_lo = 2;
    params.M_hi = 50;
    params.target_bits = static_cast<int>(state.range(0));
    params.seed = 17;
    params.bias = false;
    params.budget.count = 50;
    std::uint64_t emitted = 0;
    for (auto _ : state) {
        auto res = cforge::forge_run(params, cforge::ForgeMode::AllCarmichael);
        emitted += res.stats.records_emitted;
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(emitted));
}
BENCHMARK(bm_forge_throughput)->Arg(60)->Arg(120)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
