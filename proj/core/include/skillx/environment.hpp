#pragma once

#include <memory>
#include <string>
#include <vector>

#include "skillx/tool_schema.hpp"
#include "skillx/trajectory.hpp"

namespace skillx {

struct StepResult {
    std::string observation;
    ToolOutcome outcome = ToolOutcome::none;
};

/// One live episode for one task. Sessions are single-threaded; each
/// rollout gets its own.
class EpisodeSession {
public:
    virtual ~EpisodeSession() = default;

    /// Executes a tool action. Prerequisite violations come back as
    /// structured failure observations; an undeclared tool name throws
    /// UnknownTool.
    virtual StepResult step(const ToolCall& call) = 0;

    /// Task-dependent success indicator over the current world state.
    virtual int evaluate() const = 0;
};

/// A tool environment: declared schemas plus a factory for fresh episodes.
class Environment {
public:
    virtual ~Environment() = default;
    virtual const ToolSchemaSet& schemas() const = 0;
    virtual std::unique_ptr<EpisodeSession> begin(const Task& task) = 0;
};

/// The agent's step function. Implementations must be deterministic under
/// a fixed context for the pipeline's reproducibility guarantees to hold.
struct PolicyContext {
    const Task* task = nullptr;
    std::string skill_prompt;  // assembled skill section, empty when unconditioned
    std::vector<std::string> exploration_targets;
    double temperature = 0.0;
    int step_index = 0;
    const std::vector<TrajectoryStep>* history = nullptr;
};

class AgentPolicy {
public:
    virtual ~AgentPolicy() = default;
    virtual Action decide(const PolicyContext& context) = 0;
};

}  // namespace skillx
