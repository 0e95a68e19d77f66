#pragma once

#include <functional>
#include <string>
#include <vector>

#include "skillx/environment.hpp"
#include "skillx/extraction.hpp"
#include "skillx/gateway.hpp"
#include "skillx/retrieval.hpp"
#include "skillx/skill.hpp"
#include "skillx/store.hpp"
#include "skillx/tool_schema.hpp"
#include "skillx/vector_core.hpp"

namespace skillx {

struct RefinementConfig {
    double cluster_sim_threshold = 0.9;  // DBSCAN: eps = 1 - threshold over cosine distance
    int cluster_cap = 15;                // clusters truncated to the medoid-nearest members
    int max_iterations = 3;
    int min_cluster_points = 2;          // self-inclusive: core = has >= 1 other neighbor
};

struct SkillCluster {
    std::vector<std::string> members;        // names, ascending
    std::vector<size_t> member_indices;      // into the candidate list passed to cluster_skills
    SkillLevel level = SkillLevel::functional;
    std::string medoid;
    double mean_similarity = 0.0;            // mean pairwise cosine among members
};

struct ClusterResult {
    std::vector<SkillCluster> clusters;
    std::vector<size_t> noise_indices;       // singletons and sparse points, input order
    std::vector<size_t> truncated_indices;   // members cut by the cluster cap
};

/// Density clustering over d = 1 - cosine with eps = 1 - threshold and
/// min_samples = 2 (self-inclusive), run per level. With these settings a
/// point is core as soon as it has one neighbor, so clusters are exactly
/// the connected components of the similarity graph; singletons are noise
/// and pass through unmerged. Oversized clusters keep the cap members
/// closest to the medoid.
ClusterResult cluster_skills(const std::vector<Skill>& candidates,
                             const std::vector<SkillEmbedding>& embeddings,
                             const RefinementConfig& config);

/// One merge call over a cluster's member list; the reply's <skill>[...]
/// array may consolidate into one skill or decompose into several. Throws
/// ParseError when the reply is unusable (callers pass members through
/// unmerged).
std::vector<Skill> merge_cluster(const SkillCluster& cluster, const std::vector<Skill>& candidates,
                                 ChatGateway& chat, const TemplateSet& templates, int iteration);

/// First filter stage: the gateway's good/bad verdict, normalized; an
/// off-script reply is retried once and then treated as bad.
bool general_filter(const Skill& skill, ChatGateway& chat, const TemplateSet& templates);

/// Second stage, deterministic half: checks every tool referenced by the
/// skill (tools list and call patterns parsed from content) against the
/// declared schemas - existence, unknown parameters, missing required
/// parameters, and literal argument types.
ValidationReport tool_schema_static_check(const Skill& skill, const ToolSchemaSet& schemas);

/// Second stage, LLM half. Runs only after the static check passed.
/// Missing <answer> tags are retried once, then fail.
bool tool_schema_llm_check(const Skill& skill, const ToolSchemaSet& schemas, ChatGateway& chat,
                           const TemplateSet& templates);

struct RefineReport {
    int iteration = 0;
    int candidates_in = 0;
    int clusters = 0;
    int merged_out = 0;
    int filtered_general = 0;
    int filtered_static = 0;
    int filtered_llm = 0;
    int updates_add = 0;
    int updates_modify = 0;
    int updates_keep = 0;

    nlohmann::json to_json() const;
};

struct RefineResult {
    std::vector<SkillUpdate> updates;  // ordered by skill name
    RefineReport report;
};

struct RefineContext {
    ChatGateway& chat;
    EmbeddingGateway& embedder;
    EmbeddingCache& cache;
    const TemplateSet& templates;
    const ToolSchemaSet& schemas;
    RefinementConfig config;
    unsigned jobs = 1;
    std::vector<std::string>* log = nullptr;
};

/// The refinement operator: per level, cluster -> merge -> general filter
/// -> static schema check -> LLM schema check, then convert survivors into
/// add/modify updates against `library`. Keep updates from extraction are
/// counted and dropped (they are no-ops by definition). Deterministic under
/// mock gateways.
RefineResult refine(const std::vector<SkillUpdate>& extracted, const SkillLibrary& library,
                    RefineContext& context, int iteration);

struct IterateContext {
    ChatGateway& chat;
    EmbeddingGateway& embedder;
    EmbeddingCache& cache;
    const TemplateSet& templates;
    const ToolSchemaSet& schemas;
    RefinementConfig refinement;
    RetrievalConfig retrieval;
    int rollouts_per_task = 4;
    double temperature = 0.9;
    int step_cap = kDefaultStepCap;
    unsigned jobs = 1;
    SkillOrigin origin = SkillOrigin::extracted;

    /// Optional early-stop hook: returns a score for the round's library;
    /// iteration stops once the score no longer improves.
    std::function<double(const SkillLibrary&)> eval_hook;

    /// Sinks for artifacts produced along the way.
    std::function<void(int round, const std::vector<Trajectory>&)> trajectory_sink;
    std::function<void(const RefineReport&)> report_sink;

    std::vector<std::string>* log = nullptr;
};

/// The outer loop: each round rolls out with the current library
/// conditioning retrieval, extracts, refines, and applies updates. Returns
/// one snapshot per round, with the starting library first. `rounds` must
/// not exceed the configured maximum.
std::vector<SkillLibrary> iterate(const SkillLibrary& initial, const std::vector<Task>& train_tasks,
                                  AgentPolicy& policy, Environment& environment, int rounds,
                                  IterateContext& context);

}  // namespace skillx
