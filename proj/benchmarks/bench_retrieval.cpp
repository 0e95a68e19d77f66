#include <benchmark/benchmark.h>

#include "skillx/refinement.hpp"
#include "skillx/retrieval.hpp"
#include "skillx/sha256.hpp"
#include "skillx/util.hpp"

namespace {

using skillx::DeterministicRng;
using skillx::RetrievalConfig;
using skillx::ScoredCandidate;
using skillx::Vec;

std::vector<ScoredCandidate> random_candidates(size_t n, int dim, uint64_t seed) {
    const DeterministicRng rng(seed);
    std::vector<ScoredCandidate> out;
    for (size_t i = 0; i < n; ++i) {
        Vec v(size_t(dim));
        for (int d = 0; d < dim; ++d)
            v[size_t(d)] = float(rng.uniform(i + 1, uint64_t(d)) * 2.0 - 1.0);
        out.push_back({"c" + std::to_string(i), rng.uniform(0, i), skillx::normalized(v)});
    }
    return out;
}

void BM_MmrSelect(benchmark::State& state) {
    const auto candidates = random_candidates(size_t(state.range(0)), 64, 5);
    const RetrievalConfig config;
    for (auto _ : state) {
        auto picked = skillx::mmr_select(candidates, config);
        benchmark::DoNotOptimize(picked);
    }
}
BENCHMARK(BM_MmrSelect)->Arg(20)->Arg(100);

void BM_SemanticDedup(benchmark::State& state) {
    const auto candidates = random_candidates(size_t(state.range(0)), 64, 5);
    const RetrievalConfig config;
    for (auto _ : state) {
        auto kept = skillx::semantic_dedup(candidates, config);
        benchmark::DoNotOptimize(kept);
    }
}
BENCHMARK(BM_SemanticDedup)->Arg(100);

void BM_Sha256(benchmark::State& state) {
    const std::string payload(size_t(state.range(0)), 'x');
    for (auto _ : state) {
        auto digest = skillx::sha256_hex(payload);
        benchmark::DoNotOptimize(digest);
    }
    state.SetBytesProcessed(int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Sha256)->Arg(1 << 10)->Arg(1 << 20);

}  // namespace
