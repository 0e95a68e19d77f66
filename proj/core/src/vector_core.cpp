#include "skillx/vector_core.hpp"

#include <algorithm>
#include <cmath>

#include "skillx/sha256.hpp"

namespace skillx {

std::string skill_embedding_text(const Skill& skill) {
    if (skill.level == SkillLevel::planning) return skill.source_task_text;
    return skill.name + "\n" + skill.document;
}

std::string skill_embedding_digest(const Skill& skill) {
    return sha256_hex(to_string(skill.level) + "\x1f" + skill_embedding_text(skill));
}

double l2_norm(std::span<const float> v) {
    double sum = 0.0;
    for (float x : v) sum += double(x) * double(x);
    return std::sqrt(sum);
}

Vec normalized(std::span<const float> v) {
    const double norm = l2_norm(v);
    if (norm == 0.0) throw ZeroVector("cannot normalize the zero vector");
    Vec out(v.begin(), v.end());
    const double inv = 1.0 / norm;
    for (float& x : out) x = float(double(x) * inv);
    return out;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size())
        throw DimensionMismatch("cosine: dimensions differ (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
    double dot = 0.0;
    for (size_t i = 0; i < a.size(); ++i) dot += double(a[i]) * double(b[i]);
    return std::clamp(dot, -1.0, 1.0);
}

std::vector<SkillEmbedding> EmbeddingCache::embed_skills(EmbeddingGateway& gateway,
                                                         std::span<const Skill> skills) {
    std::vector<SkillEmbedding> out(skills.size());
    std::vector<size_t> missing;
    std::vector<std::string> missing_texts;
    {
        std::shared_lock<std::shared_mutex> lock(mutex_);
        for (size_t i = 0; i < skills.size(); ++i) {
            out[i].skill_name = skills[i].name;
            out[i].digest = skill_embedding_digest(skills[i]);
            const auto it = by_digest_.find(out[i].digest);
            if (it != by_digest_.end()) {
                out[i].vector = it->second;
            } else {
                missing.push_back(i);
                missing_texts.push_back(skill_embedding_text(skills[i]));
            }
        }
    }
    if (!missing.empty()) {
        // dedupe identical texts within the batch
        std::map<std::string, Vec> fetched;
        std::vector<std::string> unique_texts;
        for (size_t k = 0; k < missing.size(); ++k) {
            const std::string& digest = out[missing[k]].digest;
            if (fetched.emplace(digest, Vec{}).second) unique_texts.push_back(missing_texts[k]);
        }
        std::vector<std::string> order;
        for (size_t k = 0; k < missing.size(); ++k) {
            const std::string& digest = out[missing[k]].digest;
            if (std::find(order.begin(), order.end(), digest) == order.end())
                order.push_back(digest);
        }
        const auto vectors = gateway.embed(unique_texts);
        std::unique_lock<std::shared_mutex> lock(mutex_);
        for (size_t k = 0; k < order.size(); ++k) by_digest_[order[k]] = vectors[k];
        for (size_t i : missing) out[i].vector = by_digest_.at(out[i].digest);
    }
    return out;
}

std::vector<Vec> EmbeddingCache::embed_texts(EmbeddingGateway& gateway,
                                             const std::vector<std::string>& texts) {
    std::vector<Vec> out(texts.size());
    std::vector<size_t> missing;
    std::vector<std::string> digests(texts.size());
    {
        std::shared_lock<std::shared_mutex> lock(mutex_);
        for (size_t i = 0; i < texts.size(); ++i) {
            digests[i] = sha256_hex("query\x1f" + texts[i]);
            const auto it = by_digest_.find(digests[i]);
            if (it != by_digest_.end())
                out[i] = it->second;
            else
                missing.push_back(i);
        }
    }
    if (!missing.empty()) {
        std::vector<std::string> unique_texts;
        std::vector<std::string> order;
        for (size_t i : missing) {
            if (std::find(order.begin(), order.end(), digests[i]) == order.end()) {
                order.push_back(digests[i]);
                unique_texts.push_back(texts[i]);
            }
        }
        const auto vectors = gateway.embed(unique_texts);
        std::unique_lock<std::shared_mutex> lock(mutex_);
        for (size_t k = 0; k < order.size(); ++k) by_digest_[order[k]] = vectors[k];
        for (size_t i : missing) out[i] = by_digest_.at(digests[i]);
    }
    return out;
}

size_t EmbeddingCache::size() const {
    std::shared_lock<std::shared_mutex> lock(mutex_);
    return by_digest_.size();
}

}  // namespace skillx
