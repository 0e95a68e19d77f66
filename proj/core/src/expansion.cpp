#include "skillx/expansion.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "skillx/util.hpp"

namespace skillx {

std::vector<ToolStats> compute_tool_stats(const std::vector<Trajectory>& trajectories,
                                          const ToolSchemaSet& tool_universe) {
    std::map<std::string, ToolStats> by_tool;
    for (const auto& name : tool_universe.names()) {
        ToolStats stats;
        stats.tool = name;
        by_tool[name] = stats;
    }
    for (const auto& traj : trajectories) {
        for (const auto& step : traj.steps) {
            const auto it = by_tool.find(step.action.tool);
            if (it == by_tool.end()) continue;  // undeclared tools carry no stats
            ToolStats& stats = it->second;
            stats.never_invoked = false;
            stats.invocation_count += 1;
            if (step.outcome == ToolOutcome::success) stats.success_count += 1;
            if (step.outcome == ToolOutcome::failure) stats.failure_count += 1;
        }
    }
    std::vector<ToolStats> out;
    out.reserve(by_tool.size());
    for (auto& [name, stats] : by_tool) {
        stats.failure_rate = stats.invocation_count == 0
                                 ? 0.0
                                 : double(stats.failure_count) / double(stats.invocation_count);
        out.push_back(stats);
    }
    return out;
}

std::vector<std::string> prioritize_tools(const std::vector<ToolStats>& stats,
                                          double failure_rate_threshold) {
    auto tier = [&](const ToolStats& s) {
        if (s.never_invoked) return 0;
        if (s.failure_rate >= failure_rate_threshold) return 1;
        return 2;
    };
    std::vector<ToolStats> ordered = stats;
    std::sort(ordered.begin(), ordered.end(), [&](const ToolStats& a, const ToolStats& b) {
        const int ta = tier(a);
        const int tb = tier(b);
        if (ta != tb) return ta < tb;
        if (a.invocation_count != b.invocation_count)
            return a.invocation_count < b.invocation_count;
        return a.tool < b.tool;
    });
    std::vector<std::string> out;
    out.reserve(ordered.size());
    for (const auto& s : ordered) out.push_back(s.tool);
    return out;
}

ExplorationDirective guided_directive(const std::vector<ToolStats>& stats,
                                      const ExpansionConfig& config) {
    ExplorationDirective directive;
    directive.temperature = config.temperature;
    directive.rollouts_per_task = config.rollouts_per_task;
    const auto ranked = prioritize_tools(stats, config.failure_rate_threshold);
    for (const auto& tool : ranked) {
        if (int(directive.target_tools.size()) >= config.max_targets) break;
        directive.target_tools.push_back(tool);
    }
    return directive;
}

ExplorationDirective random_directive(const ToolSchemaSet& universe,
                                      const ExpansionConfig& config, uint64_t seed) {
    ExplorationDirective directive;
    directive.temperature = config.temperature;
    directive.rollouts_per_task = config.rollouts_per_task;
    std::vector<std::string> names = universe.names();
    const DeterministicRng rng(seed);
    // Fisher-Yates with the deterministic generator
    for (size_t i = names.size(); i > 1; --i) {
        const size_t j = size_t(rng.uniform_int(/*stream=*/3, i, i));
        std::swap(names[i - 1], names[j]);
    }
    for (const auto& name : names) {
        if (int(directive.target_tools.size()) >= config.max_targets) break;
        directive.target_tools.push_back(name);
    }
    return directive;
}

std::vector<Trajectory> explore(Environment& environment, const ExplorationDirective& directive,
                                const std::vector<Task>& seed_tasks, AgentPolicy& policy,
                                int step_cap, std::vector<std::string>* log) {
    for (const auto& tool : directive.target_tools) {
        if (!environment.schemas().contains(tool))
            throw std::invalid_argument("exploration target is not in the tool universe: " + tool);
    }
    std::vector<Trajectory> out;
    for (const auto& seed : seed_tasks) {
        Task task = seed;
        task.split = TaskSplit::synthesized;  // exploratory provenance
        try {
            auto batch = rollout(task, policy, environment, directive.rollouts_per_task,
                                 directive.temperature, step_cap, /*skill_prompt=*/"",
                                 directive.target_tools);
            out.insert(out.end(), std::make_move_iterator(batch.begin()),
                       std::make_move_iterator(batch.end()));
        } catch (const EnvironmentError& e) {
            if (log != nullptr)
                log->push_back("exploration skipped task " + seed.id + ": " + e.what());
        }
    }
    return out;
}

std::vector<Task> synthesize_tasks(const std::vector<Trajectory>& exploratory_trajectories,
                                   ChatGateway& chat, const TemplateSet& templates,
                                   const ToolSchemaSet& universe,
                                   std::vector<std::string>* log,
                                   std::vector<std::string>* sources) {
    if (exploratory_trajectories.empty())
        throw std::invalid_argument("task synthesis needs at least one exploratory trajectory");

    std::vector<Task> out;
    std::set<std::string> seen;
    int counter = 0;
    for (const auto& traj : exploratory_trajectories) {
        std::string rendered = "observed tool interactions:\n";
        for (const auto& step : traj.steps) {
            rendered += "- " + step.action.tool + "(" + step.action.args.dump() +
                        ") -> " + to_string(step.outcome) + ": " + step.observation + "\n";
        }
        const std::string prompt =
            templates.get("task_synthesis")
                .render({{"trajectory", rendered}, {"tools", join(universe.names(), ", ")}});
        const std::string reply =
            chat.complete({{{"user", prompt}}, /*temperature=*/0.0, /*max_output_tokens=*/256});
        const std::string text = trim(reply);
        if (text.empty()) {
            if (log != nullptr) log->push_back("task synthesis returned empty statement; skipped");
            continue;
        }
        const std::string key = normalized_text_key(text);
        if (!seen.insert(key).second) continue;  // duplicate statement
        Task task;
        task.id = "syn-" + std::to_string(++counter);
        task.text = text;
        task.split = TaskSplit::synthesized;
        if (sources != nullptr) sources->push_back(traj.task_id);
        out.push_back(std::move(task));
    }
    return out;
}

SkillLibrary expand(const SkillLibrary& library, const std::vector<Task>& synthesized_tasks,
                    AgentPolicy& policy, Environment& environment, IterateContext& context) {
    if (synthesized_tasks.empty()) return library;
    IterateContext expansion_context = context;
    expansion_context.origin = SkillOrigin::expanded;
    const auto snapshots = iterate(library, synthesized_tasks, policy, environment,
                                   /*rounds=*/1, expansion_context);
    return snapshots.back();
}

}  // namespace skillx
