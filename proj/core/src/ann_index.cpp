#include "skillx/ann_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <queue>
#include <unordered_set>

#include "skillx/util.hpp"

namespace skillx {

namespace {

// Final ranking order: similarity descending, name ascending on ties.
void sort_hits(std::vector<SearchHit>& hits) {
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.name < b.name;
    });
}

}  // namespace

std::vector<SearchHit> brute_force_search(const std::vector<SkillEmbedding>& embeddings,
                                          std::span<const float> query, int k) {
    if (embeddings.empty()) throw EmptyIndex("brute force search over empty set");
    std::vector<SearchHit> hits;
    hits.reserve(embeddings.size());
    for (const auto& e : embeddings)
        hits.push_back({e.skill_name, cosine_similarity(query, e.vector)});
    sort_hits(hits);
    if (int(hits.size()) > k) hits.resize(size_t(k));
    return hits;
}

int AnnIndex::assign_level(size_t insertion_index) const {
    const DeterministicRng rng(params_.seed);
    const double u = rng.uniform(/*stream=*/7, insertion_index);
    const double ml = 1.0 / std::log(double(params_.M));
    const double raw = -std::log(std::max(u, 1e-300)) * ml;
    return std::min(int(raw), 32);
}

double AnnIndex::similarity_to(std::span<const float> query, int id) const {
    return cosine_similarity(query, vectors_[size_t(id)]);
}

std::vector<int> AnnIndex::search_layer(std::span<const float> query, int entry, int ef,
                                        int layer) const {
    // best-first expansion: candidates max-heap, results bounded min-heap
    using Scored = std::pair<double, int>;
    auto worse = [](const Scored& a, const Scored& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second > b.second;
    };
    auto better = [](const Scored& a, const Scored& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    };
    std::priority_queue<Scored, std::vector<Scored>, decltype(worse)> candidates(worse);
    std::priority_queue<Scored, std::vector<Scored>, decltype(better)> results(better);
    std::unordered_set<int> visited;

    const double entry_sim = similarity_to(query, entry);
    candidates.push({entry_sim, entry});
    results.push({entry_sim, entry});
    visited.insert(entry);

    while (!candidates.empty()) {
        const auto [sim, id] = candidates.top();
        candidates.pop();
        if (int(results.size()) >= ef && sim < results.top().first) break;
        for (int neighbor : links_[size_t(id)][size_t(layer)]) {
            if (!visited.insert(neighbor).second) continue;
            const double ns = similarity_to(query, neighbor);
            if (int(results.size()) < ef || ns > results.top().first) {
                candidates.push({ns, neighbor});
                results.push({ns, neighbor});
                if (int(results.size()) > ef) results.pop();
            }
        }
    }

    std::vector<Scored> scored;
    scored.reserve(results.size());
    while (!results.empty()) {
        scored.push_back(results.top());
        results.pop();
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<int> out;
    out.reserve(scored.size());
    for (const auto& [s, id] : scored) out.push_back(id);
    return out;
}

void AnnIndex::connect(int id, int layer, const std::vector<int>& candidates) {
    const int max_links = layer == 0 ? 2 * params_.M : params_.M;
    auto& own = links_[size_t(id)][size_t(layer)];
    for (int candidate : candidates) {
        if (int(own.size()) >= params_.M) break;
        own.push_back(candidate);
        auto& theirs = links_[size_t(candidate)][size_t(layer)];
        theirs.push_back(id);
        if (int(theirs.size()) > max_links) {
            // prune to the closest max_links neighbors of `candidate`
            const Vec& center = vectors_[size_t(candidate)];
            std::sort(theirs.begin(), theirs.end(), [&](int a, int b) {
                const double sa = cosine_similarity(center, vectors_[size_t(a)]);
                const double sb = cosine_similarity(center, vectors_[size_t(b)]);
                if (sa != sb) return sa > sb;
                return a < b;
            });
            theirs.resize(size_t(max_links));
        }
    }
}

AnnIndex AnnIndex::build(const std::vector<SkillEmbedding>& embeddings,
                         const HnswParams& params) {
    if (embeddings.empty()) throw EmptyIndex("cannot build an index from zero embeddings");
    AnnIndex index;
    index.params_ = params;
    index.dimension_ = int(embeddings.front().vector.size());

    for (const auto& e : embeddings) {
        if (int(e.vector.size()) != index.dimension_)
            throw DimensionMismatch("embedding '" + e.skill_name + "' has width " +
                                    std::to_string(e.vector.size()) + ", expected " +
                                    std::to_string(index.dimension_));
        if (index.id_by_name_.count(e.skill_name))
            throw DuplicateName("duplicate skill in index: " + e.skill_name);

        const int id = int(index.names_.size());
        const int level = index.assign_level(size_t(id));
        index.names_.push_back(e.skill_name);
        index.vectors_.push_back(e.vector);
        index.levels_.push_back(level);
        index.links_.emplace_back(size_t(level) + 1);
        index.id_by_name_.emplace(e.skill_name, id);

        if (index.entry_point_ < 0) {
            index.entry_point_ = id;
            index.max_level_ = level;
            continue;
        }

        const std::span<const float> q(index.vectors_[size_t(id)]);
        int current = index.entry_point_;
        // greedy descent through layers above the new node's level
        for (int layer = index.max_level_; layer > level; --layer) {
            bool improved = true;
            double best = index.similarity_to(q, current);
            while (improved) {
                improved = false;
                for (int neighbor : index.links_[size_t(current)][size_t(layer)]) {
                    const double s = index.similarity_to(q, neighbor);
                    if (s > best) {
                        best = s;
                        current = neighbor;
                        improved = true;
                    }
                }
            }
        }
        // beam search and connect on the node's own layers
        for (int layer = std::min(level, index.max_level_); layer >= 0; --layer) {
            const auto found =
                index.search_layer(q, current, params.ef_construction, layer);
            index.connect(id, layer, found);
            if (!found.empty()) current = found.front();
        }
        if (level > index.max_level_) {
            index.max_level_ = level;
            index.entry_point_ = id;
        }
    }
    return index;
}

std::vector<SearchHit> AnnIndex::search(std::span<const float> query, int k) const {
    if (names_.empty()) throw EmptyIndex("search on empty index");
    if (int(query.size()) != dimension_)
        throw DimensionMismatch("query width " + std::to_string(query.size()) + ", expected " +
                                std::to_string(dimension_));
    if (k <= 0) return {};

    std::vector<SearchHit> hits;
    if (int(names_.size()) <= params_.ef_search) {
        // small index: exact scan, identical to the oracle
        hits.reserve(names_.size());
        for (size_t id = 0; id < names_.size(); ++id)
            hits.push_back({names_[id], cosine_similarity(query, vectors_[id])});
    } else {
        int current = entry_point_;
        for (int layer = max_level_; layer > 0; --layer) {
            bool improved = true;
            double best = similarity_to(query, current);
            while (improved) {
                improved = false;
                for (int neighbor : links_[size_t(current)][size_t(layer)]) {
                    const double s = similarity_to(query, neighbor);
                    if (s > best) {
                        best = s;
                        current = neighbor;
                        improved = true;
                    }
                }
            }
        }
        const int ef = std::max(params_.ef_search, k);
        for (int id : search_layer(query, current, ef, 0))
            hits.push_back({names_[size_t(id)], similarity_to(query, id)});
    }
    sort_hits(hits);
    if (int(hits.size()) > k) hits.resize(size_t(k));
    return hits;
}

const Vec* AnnIndex::vector_of(const std::string& name) const {
    const auto it = id_by_name_.find(name);
    return it == id_by_name_.end() ? nullptr : &vectors_[size_t(it->second)];
}

namespace {
constexpr char kMagic[8] = {'S', 'K', 'X', 'A', 'N', 'N', '0', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw FormatError("truncated index snapshot");
    return value;
}

void write_string(std::ostream& out, const std::string& s) {
    write_pod(out, uint32_t(s.size()));
    out.write(s.data(), std::streamsize(s.size()));
}

std::string read_string(std::istream& in) {
    const auto len = read_pod<uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), std::streamsize(len));
    if (!in) throw FormatError("truncated index snapshot");
    return s;
}
}  // namespace

void AnnIndex::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write index snapshot: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, int32_t(dimension_));
    write_pod(out, int32_t(params_.M));
    write_pod(out, int32_t(params_.ef_construction));
    write_pod(out, int32_t(params_.ef_search));
    write_pod(out, uint64_t(params_.seed));
    write_pod(out, int32_t(entry_point_));
    write_pod(out, int32_t(max_level_));
    write_pod(out, uint64_t(names_.size()));
    for (size_t id = 0; id < names_.size(); ++id) {
        write_string(out, names_[id]);
        write_pod(out, int32_t(levels_[id]));
        out.write(reinterpret_cast<const char*>(vectors_[id].data()),
                  std::streamsize(vectors_[id].size() * sizeof(float)));
        write_pod(out, uint32_t(links_[id].size()));
        for (const auto& layer : links_[id]) {
            write_pod(out, uint32_t(layer.size()));
            for (int neighbor : layer) write_pod(out, int32_t(neighbor));
        }
    }
    if (!out) throw IoError("failed writing index snapshot: " + path);
}

AnnIndex AnnIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open index snapshot: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw VersionError("unrecognized index snapshot header");
    AnnIndex index;
    index.dimension_ = read_pod<int32_t>(in);
    index.params_.M = read_pod<int32_t>(in);
    index.params_.ef_construction = read_pod<int32_t>(in);
    index.params_.ef_search = read_pod<int32_t>(in);
    index.params_.seed = read_pod<uint64_t>(in);
    index.entry_point_ = read_pod<int32_t>(in);
    index.max_level_ = read_pod<int32_t>(in);
    const uint64_t count = read_pod<uint64_t>(in);
    for (uint64_t id = 0; id < count; ++id) {
        index.names_.push_back(read_string(in));
        index.levels_.push_back(read_pod<int32_t>(in));
        Vec v(size_t(index.dimension_));
        in.read(reinterpret_cast<char*>(v.data()), std::streamsize(v.size() * sizeof(float)));
        if (!in) throw FormatError("truncated index snapshot");
        index.vectors_.push_back(std::move(v));
        const uint32_t layer_count = read_pod<uint32_t>(in);
        std::vector<std::vector<int>> layers(layer_count);
        for (auto& layer : layers) {
            const uint32_t n = read_pod<uint32_t>(in);
            layer.reserve(n);
            for (uint32_t j = 0; j < n; ++j) layer.push_back(read_pod<int32_t>(in));
        }
        index.links_.push_back(std::move(layers));
        index.id_by_name_.emplace(index.names_.back(), int(id));
    }
    return index;
}

}  // namespace skillx
