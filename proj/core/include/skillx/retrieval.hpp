#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "skillx/ann_index.hpp"
#include "skillx/gateway.hpp"
#include "skillx/skill.hpp"
#include "skillx/store.hpp"
#include "skillx/trajectory.hpp"
#include "skillx/vector_core.hpp"

namespace skillx {

struct RetrievalConfig {
    int broad_k = 100;                // top-K of the first, wide index pass
    double min_similarity = 0.45;     // quality floor, inclusive
    double best_match_band = 0.08;    // keep within this of the best match, inclusive
    double dedup_threshold = 0.95;    // pairwise cosine above this is a duplicate, strict
    double mmr_lambda = 0.75;         // relevance weight in MMR
    int final_cap = 8;
    int planning_cap = 3;             // plans fed into pseudo-plan rewriting
    bool include_planning_in_prompt = true;
};

struct ScoredCandidate {
    std::string name;
    double similarity = 0.0;  // best query similarity seen for this skill
    Vec vector;

    bool operator==(const ScoredCandidate&) const = default;
};

/// keep c iff sim(c) >= floor and best - sim(c) <= band; order preserved.
/// `candidates` must already be sorted by similarity descending.
std::vector<ScoredCandidate> hybrid_threshold_filter(const std::vector<ScoredCandidate>& candidates,
                                                     const RetrievalConfig& config);

/// Greedy scan in descending score: drop a candidate whose cosine to an
/// already-retained one exceeds the dedup threshold (strictly). Idempotent.
std::vector<ScoredCandidate> semantic_dedup(const std::vector<ScoredCandidate>& candidates,
                                            const RetrievalConfig& config);

/// Standard greedy MMR, seeded by the best query similarity: repeatedly
/// pick argmax of lambda*sim(d,q) - (1-lambda)*max_{s in selected}
/// sim(d,s); ties break by name ascending; stops at the cap.
std::vector<ScoredCandidate> mmr_select(const std::vector<ScoredCandidate>& candidates,
                                        const RetrievalConfig& config);

/// Per-skill maximum across steps, then semantic dedup. Output sorted by
/// (similarity desc, name asc).
std::vector<ScoredCandidate> cross_step_dedup(
    const std::vector<std::vector<ScoredCandidate>>& per_step, const RetrievalConfig& config);

struct RetrievalTrace {
    int planning_candidates = 0;
    int planning_kept = 0;
    int plan_steps = 0;
    int broad_hits = 0;           // across steps, after per-step threshold filter
    int after_union_dedup = 0;
    int after_mmr = 0;
    int after_self_filter = 0;
    bool rewrite_fallback = false;      // pseudo-plan parse failed, query used as one step
    bool self_filter_fallback = false;  // self-filter reply unusable, MMR output kept

    nlohmann::json to_json() const;
};

struct RetrievalBundle {
    std::vector<Skill> planning_skills;          // used for rewriting (and optionally the prompt)
    std::vector<PseudoPlanStep> pseudo_plan;     // transient; never serialized into the prompt
    std::vector<std::pair<Skill, double>> selected;  // functional/atomic skills with similarity
    RetrievalTrace trace;

    nlohmann::json to_json() const;
};

/// Deterministic prompt section: planning skills (reference plans), then
/// functional, then atomic. The pseudo-plan never appears here.
std::string assemble_prompt(const RetrievalBundle& bundle, const RetrievalConfig& config = {});

/// The inference-time retrieval path over one library snapshot: planning
/// retrieval, pseudo-plan rewriting, per-step retrieval, thresholding,
/// dedup, MMR, self-filter. Indexes are built once at construction;
/// retrieve() is safe to call from several threads.
class Retriever {
public:
    Retriever(const SkillLibrary& library, ChatGateway& chat, EmbeddingGateway& embedder,
              EmbeddingCache& cache, const TemplateSet& templates, RetrievalConfig config = {});

    RetrievalBundle retrieve(const std::string& query) const;

    /// Stages exposed for tests and the planning path.
    std::vector<Skill> retrieve_planning(const std::string& query, RetrievalTrace* trace) const;
    std::vector<PseudoPlanStep> rewrite_pseudo_plan(const std::string& query,
                                                    const std::vector<Skill>& planning_skills,
                                                    RetrievalTrace* trace) const;
    std::vector<std::vector<ScoredCandidate>> retrieve_for_plan(
        const std::vector<PseudoPlanStep>& pseudo_plan) const;
    std::vector<ScoredCandidate> self_filter(const std::string& query,
                                             const std::vector<PseudoPlanStep>& pseudo_plan,
                                             const std::vector<ScoredCandidate>& candidates,
                                             RetrievalTrace* trace) const;

    const RetrievalConfig& config() const { return config_; }

private:
    std::vector<ScoredCandidate> search_stage(const AnnIndex& index, const Vec& query) const;

    const SkillLibrary& library_;
    ChatGateway& chat_;
    EmbeddingGateway& embedder_;
    EmbeddingCache& cache_;
    const TemplateSet& templates_;
    RetrievalConfig config_;
    std::optional<AnnIndex> planning_index_;
    std::optional<AnnIndex> skill_index_;  // functional + atomic tiers
};

}  // namespace skillx
