#include "skillx/trajectory.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "skillx/errors.hpp"
#include "skillx/util.hpp"

namespace skillx {

std::string to_string(TaskSplit split) {
    switch (split) {
        case TaskSplit::train: return "train";
        case TaskSplit::synthesized: return "synthesized";
        case TaskSplit::test: return "test";
    }
    return "train";
}

TaskSplit task_split_from_string(const std::string& tag) {
    if (tag == "train") return TaskSplit::train;
    if (tag == "synthesized") return TaskSplit::synthesized;
    if (tag == "test") return TaskSplit::test;
    throw FormatError("unknown task split: " + tag);
}

std::string to_string(ToolOutcome outcome) {
    switch (outcome) {
        case ToolOutcome::success: return "success";
        case ToolOutcome::failure: return "failure";
        case ToolOutcome::none: return "none";
    }
    return "none";
}

ToolOutcome tool_outcome_from_string(const std::string& tag) {
    if (tag == "success") return ToolOutcome::success;
    if (tag == "failure") return ToolOutcome::failure;
    if (tag == "none") return ToolOutcome::none;
    throw FormatError("unknown tool outcome: " + tag);
}

std::vector<std::string> Trajectory::invoked_tools() const {
    std::set<std::string> tools;
    for (const auto& step : steps)
        if (!step.action.tool.empty()) tools.insert(step.action.tool);
    return {tools.begin(), tools.end()};
}

std::vector<PseudoPlanStep> parse_plan_steps(const std::string& body) {
    static const std::regex step_re(R"(^\s*#\s*step\s+(\d+)\s*:\s*(.*)$)", std::regex::icase);
    static const std::regex apis_re(R"(;\s*(?:key\s+)?apis?(?:\s+used)?\s*:\s*(.*)$)",
                                    std::regex::icase);
    std::vector<PseudoPlanStep> steps;
    for (const auto& line : split_lines(body)) {
        std::smatch match;
        if (!std::regex_match(line, match, step_re)) continue;
        PseudoPlanStep step;
        step.ordinal = std::stoi(match[1].str());
        std::string rest = trim(match[2].str());
        std::smatch apis;
        if (std::regex_search(rest, apis, apis_re)) {
            std::string tool_list = apis[1].str();
            rest = trim(rest.substr(0, size_t(apis.position(0))));
            size_t start = 0;
            while (start <= tool_list.size()) {
                const size_t comma = tool_list.find(',', start);
                const std::string tool =
                    trim(comma == std::string::npos ? tool_list.substr(start)
                                                    : tool_list.substr(start, comma - start));
                if (!tool.empty() && tool != ".") {
                    // strip a trailing period from the last item
                    std::string cleaned = tool;
                    while (!cleaned.empty() && cleaned.back() == '.') cleaned.pop_back();
                    if (!cleaned.empty()) step.key_tools.push_back(cleaned);
                }
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        }
        step.goal_text = rest;
        if (!step.goal_text.empty()) steps.push_back(std::move(step));
    }
    return steps;
}

std::string format_plan_steps(const std::vector<PseudoPlanStep>& steps) {
    std::vector<std::string> lines;
    lines.reserve(steps.size());
    for (const auto& step : steps) {
        std::string line = "# step " + std::to_string(step.ordinal) + ": " + step.goal_text;
        if (!step.key_tools.empty()) line += "; apis: " + join(step.key_tools, ", ");
        lines.push_back(std::move(line));
    }
    return join(lines, "\n");
}

}  // namespace skillx
