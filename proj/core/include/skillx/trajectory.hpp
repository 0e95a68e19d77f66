#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace skillx {

enum class TaskSplit { train, synthesized, test };

std::string to_string(TaskSplit split);
TaskSplit task_split_from_string(const std::string& tag);

struct Task {
    std::string id;
    std::string text;
    TaskSplit split = TaskSplit::train;

    bool operator==(const Task&) const = default;
};

struct ToolCall {
    std::string tool;
    nlohmann::json args = nlohmann::json::object();

    bool operator==(const ToolCall&) const = default;
};

/// One agent decision: either a tool invocation or episode termination.
/// `raw_code` carries code-style actions from environments that execute
/// scripts instead of named tool calls.
struct Action {
    bool finish = false;
    std::string thought;
    ToolCall call;
    std::string raw_code;

    bool operator==(const Action&) const = default;
};

enum class ToolOutcome { success, failure, none };

std::string to_string(ToolOutcome outcome);
ToolOutcome tool_outcome_from_string(const std::string& tag);

struct TrajectoryStep {
    int index = 0;  // strictly increasing within a trajectory
    std::string thought;
    ToolCall action;
    std::string raw_code;
    std::string observation;
    ToolOutcome outcome = ToolOutcome::none;

    bool operator==(const TrajectoryStep&) const = default;
};

/// Ordered record of one rollout. `success` is assigned by the
/// environment's evaluator, never by the extractor.
struct Trajectory {
    std::string task_id;
    TaskSplit split = TaskSplit::train;
    std::string task_text;
    std::vector<TrajectoryStep> steps;
    bool success = false;
    int rollout_index = 1;  // 1-based within the m rollouts of a task

    bool operator==(const Trajectory&) const = default;

    /// Distinct tool names invoked, in name order.
    std::vector<std::string> invoked_tools() const;
};

/// One step of a rewritten pseudo-plan; also the unit of plan-extraction
/// output ("# step N: goal; apis: a, b").
struct PseudoPlanStep {
    int ordinal = 0;
    std::string goal_text;
    std::vector<std::string> key_tools;

    bool operator==(const PseudoPlanStep&) const = default;
};

/// Parses "# step N: goal[; apis: a, b]" lines out of a plan body.
std::vector<PseudoPlanStep> parse_plan_steps(const std::string& body);

/// Renders steps back into the canonical "# step N: ..." line format.
std::string format_plan_steps(const std::vector<PseudoPlanStep>& steps);

}  // namespace skillx
