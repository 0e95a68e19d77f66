#pragma once

#include <map>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "skillx/gateway.hpp"
#include "skillx/skill.hpp"

namespace skillx {

/// The text a skill is embedded under. Functional and atomic skills embed
/// name + document (content is implementation detail and queries describe
/// goals); planning skills embed the task text they came from, since plans
/// are retrieved by task similarity.
std::string skill_embedding_text(const Skill& skill);

/// Digest tying an embedding to the exact fields it was computed from, so
/// stale vectors are detected and recomputed.
std::string skill_embedding_digest(const Skill& skill);

/// v / ||v||2. Throws ZeroVector on all-zero input.
Vec normalized(std::span<const float> v);

double l2_norm(std::span<const float> v);

/// Inner product of two unit vectors, accumulated in double and clamped to
/// [-1, 1] against rounding. Exactly symmetric in its arguments.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

struct SkillEmbedding {
    std::string skill_name;
    Vec vector;           // unit norm
    std::string digest;   // skill_embedding_digest at embed time
};

/// Digest-keyed embedding store. Re-embedding an unchanged skill is a
/// cache hit and never reaches the gateway. Reads are shared, writes
/// exclusive.
class EmbeddingCache {
public:
    /// Embeds all skills, batching the cache misses into one gateway call.
    /// Output order matches input order.
    std::vector<SkillEmbedding> embed_skills(EmbeddingGateway& gateway,
                                             std::span<const Skill> skills);

    /// Embeds free-form query texts through the same cache.
    std::vector<Vec> embed_texts(EmbeddingGateway& gateway,
                                 const std::vector<std::string>& texts);

    size_t size() const;

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, Vec> by_digest_;
};

}  // namespace skillx
