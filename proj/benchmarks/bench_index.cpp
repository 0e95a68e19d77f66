#include <benchmark/benchmark.h>

#include "skillx/ann_index.hpp"
#include "skillx/util.hpp"

namespace {

using skillx::AnnIndex;
using skillx::DeterministicRng;
using skillx::SkillEmbedding;
using skillx::Vec;

std::vector<SkillEmbedding> random_embeddings(size_t n, int dim, uint64_t seed) {
    const DeterministicRng rng(seed);
    std::vector<SkillEmbedding> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        Vec v(size_t(dim));
        for (int d = 0; d < dim; ++d)
            v[size_t(d)] = float(rng.uniform(i + 1, uint64_t(d)) * 2.0 - 1.0);
        out.push_back({"s" + std::to_string(i), skillx::normalized(v), ""});
    }
    return out;
}

void BM_HnswBuild(benchmark::State& state) {
    const auto embeddings = random_embeddings(size_t(state.range(0)), 128, 7);
    for (auto _ : state) {
        auto index = AnnIndex::build(embeddings);
        benchmark::DoNotOptimize(index);
    }
}
BENCHMARK(BM_HnswBuild)->Arg(256)->Arg(1024);

void BM_HnswSearch(benchmark::State& state) {
    const auto embeddings = random_embeddings(size_t(state.range(0)), 128, 7);
    const auto index = AnnIndex::build(embeddings);
    const auto queries = random_embeddings(64, 128, 99);
    size_t q = 0;
    for (auto _ : state) {
        auto hits = index.search(queries[q % queries.size()].vector, 10);
        benchmark::DoNotOptimize(hits);
        ++q;
    }
}
BENCHMARK(BM_HnswSearch)->Arg(1024)->Arg(4096);

void BM_BruteForceSearch(benchmark::State& state) {
    const auto embeddings = random_embeddings(size_t(state.range(0)), 128, 7);
    const auto queries = random_embeddings(64, 128, 99);
    size_t q = 0;
    for (auto _ : state) {
        auto hits = skillx::brute_force_search(embeddings, queries[q % queries.size()].vector, 10);
        benchmark::DoNotOptimize(hits);
        ++q;
    }
}
BENCHMARK(BM_BruteForceSearch)->Arg(1024)->Arg(4096);

}  // namespace
