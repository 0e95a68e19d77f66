#pragma once

#include <vector>

#include "skillx/extraction.hpp"
#include "skillx/retrieval.hpp"

namespace skillx {

/// Desk-scale A/B metrics. Avg@m is the mean per-episode success rate,
/// Pass@m the fraction of tasks solved at least once across the m runs.
struct ProbeResult {
    double avg_at_m = 0.0;
    double pass_at_m = 0.0;
    double mean_steps = 0.0;
    nlohmann::json per_task = nlohmann::json::array();
    std::vector<Trajectory> trajectories;  // task order, then rollout order

    nlohmann::json to_json() const;
};

/// No-skill baseline: plain rollouts, aggregate metrics.
ProbeResult run_baseline(const std::vector<Task>& tasks, AgentPolicy& policy,
                         Environment& environment, int m, int step_cap = kDefaultStepCap);

/// Same metrics with a retrieval bundle assembled per task and injected
/// into the policy context. With an empty library this degenerates to
/// run_baseline, bit for bit.
ProbeResult run_conditioned(const std::vector<Task>& tasks, AgentPolicy& policy,
                            Environment& environment, const SkillLibrary& library,
                            ChatGateway& chat, EmbeddingGateway& embedder, EmbeddingCache& cache,
                            const TemplateSet& templates, int m,
                            RetrievalConfig config = {}, int step_cap = kDefaultStepCap);

}  // namespace skillx
