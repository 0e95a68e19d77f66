#pragma once

#include <string>
#include <vector>

#include "skillx/refinement.hpp"

namespace skillx {

struct ToolStats {
    std::string tool;
    int invocation_count = 0;
    int success_count = 0;
    int failure_count = 0;
    double failure_rate = 0.0;  // 0 when never invoked
    bool never_invoked = true;
};

struct ExpansionConfig {
    double failure_rate_threshold = 0.5;  // tier-1 cutoff
    int max_targets = 4;                  // exploration directive size
    double temperature = 1.0;
    int rollouts_per_task = 1;
};

struct ExplorationDirective {
    std::vector<std::string> target_tools;  // ranked
    double temperature = 1.0;
    int rollouts_per_task = 1;
};

/// Per-tool usage counters over a trajectory batch; every universe tool
/// gets an entry, including the never-invoked ones.
std::vector<ToolStats> compute_tool_stats(const std::vector<Trajectory>& trajectories,
                                          const ToolSchemaSet& tool_universe);

/// Exploration priority: tier 0 never invoked, tier 1 failure-prone
/// (failure_rate >= threshold), tier 2 the rest; within a tier ascending
/// invocation count, ties by name. The output is a permutation of the
/// universe.
std::vector<std::string> prioritize_tools(const std::vector<ToolStats>& stats,
                                          double failure_rate_threshold = 0.5);

/// Builds a directive from prioritized stats (the experience-guided
/// strategy).
ExplorationDirective guided_directive(const std::vector<ToolStats>& stats,
                                      const ExpansionConfig& config);

/// Uniform-random targeting with the same budget; the comparison baseline.
ExplorationDirective random_directive(const ToolSchemaSet& universe,
                                      const ExpansionConfig& config, uint64_t seed);

/// One exploratory rollout per seed task at the directive's temperature,
/// with target tools injected as guidance. Per-task environment failures
/// are skipped and noted.
std::vector<Trajectory> explore(Environment& environment, const ExplorationDirective& directive,
                                const std::vector<Task>& seed_tasks, AgentPolicy& policy,
                                int step_cap = kDefaultStepCap,
                                std::vector<std::string>* log = nullptr);

/// One chat call per exploratory trajectory; replies become new task
/// statements, deduplicated by normalized text. Ids run syn-1, syn-2, ...
/// `sources`, when given, receives the originating trajectory's task id
/// per synthesized task.
std::vector<Task> synthesize_tasks(const std::vector<Trajectory>& exploratory_trajectories,
                                   ChatGateway& chat, const TemplateSet& templates,
                                   const ToolSchemaSet& universe,
                                   std::vector<std::string>* log = nullptr,
                                   std::vector<std::string>* sources = nullptr);

/// Reruns acquisition and refinement on the synthesized tasks; every new
/// skill is stamped origin=expanded.
SkillLibrary expand(const SkillLibrary& library, const std::vector<Task>& synthesized_tasks,
                    AgentPolicy& policy, Environment& environment, IterateContext& context);

}  // namespace skillx
