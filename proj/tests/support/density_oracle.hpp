#pragma once

// Independent O(n^2) density-clustering oracle: union-find over every pair
// with cosine >= threshold, singletons reported as noise. Deliberately a
// different algorithm from the production DBSCAN expansion.

#include <algorithm>
#include <numeric>
#include <vector>

#include "skillx/vector_core.hpp"

namespace skillx::testsupport {

struct OraclePartition {
    std::vector<std::vector<size_t>> clusters;  // member indices, each sorted
    std::vector<size_t> noise;
};

inline OraclePartition density_oracle(const std::vector<Vec>& vectors, double sim_threshold) {
    const size_t n = vectors.size();
    std::vector<size_t> parent(n);
    std::iota(parent.begin(), parent.end(), size_t(0));
    std::vector<size_t> degree(n, 0);

    std::function<size_t(size_t)> find = [&](size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };

    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            if (cosine_similarity(vectors[i], vectors[j]) >= sim_threshold) {
                ++degree[i];
                ++degree[j];
                parent[find(i)] = find(j);
            }
        }
    }

    std::vector<std::vector<size_t>> groups(n);
    OraclePartition out;
    for (size_t i = 0; i < n; ++i) {
        if (degree[i] == 0) {
            out.noise.push_back(i);
            continue;
        }
        groups[find(i)].push_back(i);
    }
    for (auto& group : groups) {
        if (group.empty()) continue;
        std::sort(group.begin(), group.end());
        out.clusters.push_back(std::move(group));
    }
    std::sort(out.clusters.begin(), out.clusters.end());
    return out;
}

}  // namespace skillx::testsupport
