#include "skillx/baseline.hpp"

#include "skillx/extraction.hpp"

namespace skillx {

using nlohmann::json;

json ProbeResult::to_json() const {
    return json{{"avg_at_m", avg_at_m},
                {"pass_at_m", pass_at_m},
                {"mean_steps", mean_steps},
                {"per_task", per_task}};
}

namespace {

ProbeResult run_probe(const std::vector<Task>& tasks, AgentPolicy& policy,
                      Environment& environment, int m, int step_cap,
                      const std::function<std::string(const Task&)>& prompt_for) {
    ProbeResult result;
    size_t episodes = 0;
    size_t total_steps = 0;
    double success_sum = 0.0;
    double pass_sum = 0.0;
    for (const auto& task : tasks) {
        const std::string prompt = prompt_for ? prompt_for(task) : std::string{};
        auto batch = rollout(task, policy, environment, m, /*temperature=*/0.0, step_cap, prompt);
        int successes = 0;
        size_t steps = 0;
        for (const auto& traj : batch) {
            successes += traj.success ? 1 : 0;
            steps += traj.steps.size();
        }
        episodes += batch.size();
        total_steps += steps;
        const double rate = double(successes) / double(batch.size());
        success_sum += rate;
        pass_sum += successes > 0 ? 1.0 : 0.0;
        result.per_task.push_back({{"task_id", task.id},
                                   {"success_rate", rate},
                                   {"solved", successes > 0},
                                   {"mean_steps", double(steps) / double(batch.size())}});
        result.trajectories.insert(result.trajectories.end(),
                                   std::make_move_iterator(batch.begin()),
                                   std::make_move_iterator(batch.end()));
    }
    if (!tasks.empty()) {
        result.avg_at_m = success_sum / double(tasks.size());
        result.pass_at_m = pass_sum / double(tasks.size());
    }
    if (episodes > 0) result.mean_steps = double(total_steps) / double(episodes);
    return result;
}

}  // namespace

ProbeResult run_baseline(const std::vector<Task>& tasks, AgentPolicy& policy,
                         Environment& environment, int m, int step_cap) {
    return run_probe(tasks, policy, environment, m, step_cap, nullptr);
}

ProbeResult run_conditioned(const std::vector<Task>& tasks, AgentPolicy& policy,
                            Environment& environment, const SkillLibrary& library,
                            ChatGateway& chat, EmbeddingGateway& embedder, EmbeddingCache& cache,
                            const TemplateSet& templates, int m, RetrievalConfig config,
                            int step_cap) {
    if (library.empty()) {
        // degenerate case: no retrieval, no prompt, identical trajectories
        return run_baseline(tasks, policy, environment, m, step_cap);
    }
    Retriever retriever(library, chat, embedder, cache, templates, config);
    return run_probe(tasks, policy, environment, m, step_cap, [&](const Task& task) {
        return assemble_prompt(retriever.retrieve(task.text), config);
    });
}

}  // namespace skillx
