#pragma once

#include <memory>
#include <string>

#include "skillx/baseline.hpp"
#include "skillx/config.hpp"
#include "skillx/expansion.hpp"
#include "skillx/toy_env.hpp"

namespace skillx {

/// Everything a pipeline run needs, wired from one config: gateways (mock
/// or HTTP), templates, schemas, the toy environment, and the scripted
/// policy. All derived randomness flows from config.seed.
class PipelineRuntime {
public:
    static PipelineRuntime open(PipelineConfig config);

    PipelineConfig config;
    std::unique_ptr<ChatGateway> chat;
    std::unique_ptr<EmbeddingGateway> embedder;
    std::unique_ptr<EmbeddingCache> cache = std::make_unique<EmbeddingCache>();
    TemplateSet templates;
    ToolSchemaSet schemas;
    std::unique_ptr<ToyEnvironment> environment;
    std::unique_ptr<ScriptedPolicy> policy;
    std::vector<std::string> log;

    IterateContext iterate_context();

private:
    PipelineRuntime(PipelineConfig cfg) : config(std::move(cfg)) {}
};

/// Subcommand bodies shared by the CLI and the acceptance suite. Each
/// returns a machine-readable report and writes its artifacts under
/// config.out.
nlohmann::json run_build(PipelineRuntime& runtime);
nlohmann::json run_refine(PipelineRuntime& runtime, int rounds);
nlohmann::json run_expand(PipelineRuntime& runtime);
nlohmann::json run_retrieve(PipelineRuntime& runtime, const std::string& query,
                            const std::string& emit_prompt_path = "");
nlohmann::json run_validate(PipelineRuntime& runtime, int& violations);
nlohmann::json run_stats(PipelineRuntime& runtime);

/// Loads every trajectory file under the runtime's trajectory directory,
/// round by round.
std::vector<Trajectory> load_all_trajectories(const PipelineRuntime& runtime);

}  // namespace skillx
