#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "skillx/vector_core.hpp"

namespace skillx {

struct HnswParams {
    int M = 16;                // max neighbors per node on layers > 0
    int ef_construction = 200;
    int ef_search = 128;
    uint64_t seed = 0x15b3a9;  // drives level assignment, keyed by insertion order
};

struct SearchHit {
    std::string name;
    double similarity;

    bool operator==(const SearchHit&) const = default;
};

/// HNSW proximity graph over unit vectors with inner-product scoring.
/// Immutable after build; libraries are small enough that rebuild-on-change
/// replaces incremental deletes. Builds are bit-reproducible for a fixed
/// insertion order and seed.
class AnnIndex {
public:
    /// Throws DimensionMismatch on ragged input, DuplicateName on repeated
    /// skill names. Insertion order is the order of `embeddings`.
    static AnnIndex build(const std::vector<SkillEmbedding>& embeddings,
                          const HnswParams& params = {});

    /// Top-k by (similarity desc, name asc). Indexes no larger than
    /// ef_search are scanned exactly, which also pins down the small-index
    /// equality guarantee against the brute-force oracle.
    std::vector<SearchHit> search(std::span<const float> query, int k) const;

    size_t size() const { return names_.size(); }
    int dimension() const { return dimension_; }
    const HnswParams& params() const { return params_; }

    const Vec* vector_of(const std::string& name) const;
    const std::vector<std::string>& names() const { return names_; }

    /// Binary snapshot with a versioned header; `save` then `load` yields
    /// an identical index. Intended as an on-disk cache keyed by library
    /// digest.
    void save(const std::string& path) const;
    static AnnIndex load(const std::string& path);

private:
    AnnIndex() = default;

    int assign_level(size_t insertion_index) const;
    double similarity_to(std::span<const float> query, int id) const;
    std::vector<int> search_layer(std::span<const float> query, int entry, int ef,
                                  int layer) const;
    void connect(int id, int layer, const std::vector<int>& candidates);

    int dimension_ = 0;
    HnswParams params_;
    std::vector<std::string> names_;
    std::vector<Vec> vectors_;
    std::vector<int> levels_;
    // links_[node][layer] = neighbor ids; layer 0 allows 2*M neighbors
    std::vector<std::vector<std::vector<int>>> links_;
    std::map<std::string, int> id_by_name_;
    int entry_point_ = -1;
    int max_level_ = -1;
};

/// Exhaustive oracle with the identical ranking contract as
/// AnnIndex::search. Kept independent of the graph code on purpose.
std::vector<SearchHit> brute_force_search(const std::vector<SkillEmbedding>& embeddings,
                                          std::span<const float> query, int k);

}  // namespace skillx
