#include "skillx/extraction.hpp"

#include <algorithm>
#include <sstream>

#include "skillx/util.hpp"

namespace skillx {

using nlohmann::json;

std::vector<Trajectory> rollout(const Task& task, AgentPolicy& policy, Environment& environment,
                                int m, double temperature, int step_cap,
                                const std::string& skill_prompt,
                                const std::vector<std::string>& exploration_targets) {
    if (m < 1) throw std::invalid_argument("rollout: m must be >= 1");
    std::vector<Trajectory> out;
    out.reserve(size_t(m));
    for (int i = 1; i <= m; ++i) {
        auto session = environment.begin(task);
        Trajectory traj;
        traj.task_id = task.id;
        traj.split = task.split;
        traj.task_text = task.text;
        traj.rollout_index = i;

        bool finished = false;
        for (int t = 1; t <= step_cap; ++t) {
            PolicyContext context;
            context.task = &task;
            context.skill_prompt = skill_prompt;
            context.exploration_targets = exploration_targets;
            context.temperature = temperature;
            context.step_index = t - 1;
            context.history = &traj.steps;
            const Action action = policy.decide(context);
            if (action.finish) {
                finished = true;
                break;
            }
            TrajectoryStep step;
            step.index = t;
            step.thought = action.thought;
            step.action = action.call;
            step.raw_code = action.raw_code;
            try {
                const StepResult result = session->step(action.call);
                step.observation = result.observation;
                step.outcome = result.outcome;
            } catch (const UnknownTool& e) {
                step.observation = json{{"error", e.what()}}.dump();
                step.outcome = ToolOutcome::failure;
            }
            traj.steps.push_back(std::move(step));
        }
        // a capped episode counts as a failure regardless of world state
        traj.success = finished && session->evaluate() == 1;
        out.push_back(std::move(traj));
    }
    return out;
}

FeedbackSummary summarize_feedback(const std::string& observation, ChatGateway& chat,
                                   const TemplateSet& templates, int token_limit,
                                   const std::string& action_text) {
    if (int(whitespace_token_count(observation)) <= token_limit)
        return {observation, false};  // "exceeding" is strict

    const std::string prompt = templates.get("tool_summary")
                                   .render({{"action", action_text}, {"feedback", observation}});
    auto extract_tagged = [](const std::string& reply) -> std::string {
        const size_t open = reply.find("<feedback>");
        const size_t close = reply.find("</feedback>");
        if (open == std::string::npos || close == std::string::npos || close <= open) return "";
        return trim(reply.substr(open + 10, close - open - 10));
    };

    for (int attempt = 0; attempt < 2; ++attempt) {
        const std::string reply =
            chat.complete({{{"user", prompt}}, /*temperature=*/0.0, /*max_output_tokens=*/512});
        const std::string summary = extract_tagged(reply);
        if (!summary.empty()) return {summary, false};
    }

    // tags never showed up: hard-truncate to the token limit
    std::istringstream in(observation);
    std::string token;
    std::vector<std::string> kept;
    while (int(kept.size()) < token_limit && in >> token) kept.push_back(token);
    return {join(kept, " "), true};
}

std::string render_trajectory(const Trajectory& trajectory, ChatGateway& chat,
                              const TemplateSet& templates, int token_limit) {
    std::string out = "task: " + trajectory.task_text + "\n";
    for (const auto& step : trajectory.steps) {
        out += "step " + std::to_string(step.index) + ":\n";
        if (!step.thought.empty()) out += "  thought: " + step.thought + "\n";
        if (!step.raw_code.empty())
            out += "  action: " + step.raw_code + "\n";
        else
            out += "  action: " + step.action.tool + "(" + step.action.args.dump() + ")\n";
        const auto summary = summarize_feedback(step.observation, chat, templates, token_limit);
        out += "  observation: " + summary.text + "\n";
        out += "  outcome: " + to_string(step.outcome) + "\n";
    }
    out += "success: " + std::string(trajectory.success ? "true" : "false") + "\n";
    return out;
}

std::string render_skill(const Skill& skill) {
    json doc = {{"name", skill.name},
                {"document", skill.document},
                {"content", skill.content},
                {"tools", skill.tools}};
    return doc.dump(2);
}

std::string render_library(const SkillLibrary& library) {
    if (library.empty()) return "(the skills library is currently empty)";
    std::string out;
    for (const auto& [name, skill] : library.skills()) {
        out += "- name: " + name + " (" + to_string(skill.level) + ")\n";
        out += "  document: " + skill.document + "\n";
    }
    return out;
}

namespace {

/// Strips one fenced code block (```json ... ``` or plain ```), if present.
std::string strip_fences(const std::string& text) {
    const size_t open = text.find("```");
    if (open == std::string::npos) return text;
    size_t body_start = open + 3;
    // optional language tag up to end of line
    const size_t nl = text.find('\n', body_start);
    if (nl != std::string::npos) {
        const std::string tag = trim(text.substr(body_start, nl - body_start));
        bool tag_like = !tag.empty() && tag.size() <= 10;
        for (char c : tag)
            if (!std::isalpha(static_cast<unsigned char>(c))) tag_like = false;
        if (tag_like || tag.empty()) body_start = nl + 1;
    }
    const size_t close = text.find("```", body_start);
    if (close == std::string::npos) return text.substr(body_start);
    return text.substr(body_start, close - body_start);
}

Skill skill_from_update_json(const json& raw) {
    json record = raw;
    if (record.is_string()) {
        try {
            record = json::parse(record.get<std::string>());
        } catch (const json::exception&) {
            throw SchemaError("update 'skill' is a string but not JSON");
        }
    }
    if (!record.is_object()) throw SchemaError("update 'skill' is not an object");
    Skill skill;
    try {
        skill.name = record.at("name").get<std::string>();
        skill.document = record.at("document").get<std::string>();
        skill.content = record.at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw SchemaError("update skill missing required field: " + std::string(e.what()));
    }
    const json tools = record.value("tools", json::array());
    if (tools.is_array()) {
        for (const auto& t : tools) skill.tools.push_back(t.get<std::string>());
    } else if (tools.is_string()) {
        for (const auto& part : split_lines(tools.get<std::string>())) {
            size_t start = 0;
            std::string line = part;
            while (start <= line.size()) {
                const size_t comma = line.find(',', start);
                const std::string tool = trim(comma == std::string::npos
                                                  ? line.substr(start)
                                                  : line.substr(start, comma - start));
                if (!tool.empty()) skill.tools.push_back(tool);
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        }
    }
    return skill;
}

}  // namespace

std::vector<SkillUpdate> parse_update_response(const std::string& text) {
    json doc;
    try {
        doc = json::parse(strip_fences(text));
    } catch (const json::exception& e) {
        throw ParseError("update reply is not JSON: " + std::string(e.what()));
    }
    if (!doc.is_array()) throw ParseError("update reply is not a JSON array");

    std::vector<SkillUpdate> updates;
    for (const auto& element : doc) {
        if (!element.is_object()) throw SchemaError("update element is not an object");
        const std::string option = element.value("option", "");
        SkillUpdate update;
        if (option == "add") {
            if (!element.contains("skill")) throw SchemaError("add update missing 'skill'");
            update.option = UpdateOption::add;
            update.skill = skill_from_update_json(element.at("skill"));
        } else if (option == "modify") {
            if (!element.contains("skill")) throw SchemaError("modify update missing 'skill'");
            if (!element.contains("modified_from"))
                throw SchemaError("modify update missing 'modified_from'");
            update.option = UpdateOption::modify;
            update.skill = skill_from_update_json(element.at("skill"));
            update.modified_from = element.at("modified_from").get<std::string>();
        } else if (option == "keep") {
            if (!element.contains("skill_name")) throw SchemaError("keep update missing 'skill_name'");
            update.option = UpdateOption::keep;
            update.kept_name = element.at("skill_name").get<std::string>();
        } else {
            throw SchemaError("unknown update option: '" + option + "'");
        }
        updates.push_back(std::move(update));
    }
    return updates;
}

Skill extract_planning_skill(const Trajectory& trajectory, const Task& task, ChatGateway& chat,
                             const TemplateSet& templates, int iteration, SkillOrigin origin) {
    if (!trajectory.success)
        throw std::invalid_argument("planning extraction requires a successful trajectory");

    const std::string prompt = templates.get("plan_extract")
                                   .render({{"task", task.text},
                                            {"trajectory", render_trajectory(trajectory, chat,
                                                                             templates)}});
    const std::string reply =
        chat.complete({{{"user", prompt}}, /*temperature=*/0.0, /*max_output_tokens=*/2048});

    const size_t open = reply.find("<plan>");
    const size_t close = reply.find("</plan>");
    if (open == std::string::npos || close == std::string::npos || close <= open)
        throw ParseError("no <plan> block in reply");
    const std::string body = reply.substr(open + 6, close - open - 6);
    const auto steps = parse_plan_steps(body);
    if (steps.empty()) throw EmptyPlan("plan block contains no steps");

    Skill skill;
    skill.level = SkillLevel::planning;
    skill.name = "plan: " + task.id;
    skill.document = "Ordered step plan distilled from a successful run of: " + task.text;
    skill.content = format_plan_steps(steps);
    std::vector<std::string> tools;
    for (const auto& step : steps)
        for (const auto& tool : step.key_tools) tools.push_back(tool);
    std::sort(tools.begin(), tools.end());
    tools.erase(std::unique(tools.begin(), tools.end()), tools.end());
    skill.tools = std::move(tools);
    skill.source_task_text = task.text;
    skill.provenance = {task.id, iteration, origin};
    return skill;
}

namespace {

void stamp(SkillUpdate& update, SkillLevel level, const std::string& task_id, int iteration,
           SkillOrigin origin) {
    if (update.skill) {
        update.skill->level = level;
        update.skill->provenance = {task_id, iteration, origin};
    }
}

void note(std::vector<std::string>* log, const std::string& message) {
    if (log != nullptr) log->push_back(message);
}

}  // namespace

std::vector<SkillUpdate> extract_functional_skills(const Trajectory& trajectory,
                                                   const Skill& planning_skill,
                                                   const SkillLibrary& library_snapshot,
                                                   ChatGateway& chat, const TemplateSet& templates,
                                                   int iteration, SkillOrigin origin,
                                                   std::vector<std::string>* log) {
    const auto steps = parse_plan_steps(planning_skill.content);
    if (steps.empty()) throw std::invalid_argument("planning skill has no steps");

    const std::string rendered_trajectory = render_trajectory(trajectory, chat, templates);
    const std::string rendered_library = render_library(library_snapshot);

    std::vector<SkillUpdate> all;
    for (const auto& step : steps) {
        std::string step_line = "# step " + std::to_string(step.ordinal) + ": " + step.goal_text;
        if (!step.key_tools.empty()) step_line += "; apis: " + join(step.key_tools, ", ");
        const std::string prompt =
            templates.get("functional_extract")
                .render({{"task", planning_skill.source_task_text},
                         {"trajectory", rendered_trajectory},
                         {"library", rendered_library},
                         {"step", step_line}});
        const std::string reply =
            chat.complete({{{"user", prompt}}, /*temperature=*/0.0, /*max_output_tokens=*/2048});
        try {
            auto updates = parse_update_response(reply);
            for (auto& update : updates)
                stamp(update, SkillLevel::functional, trajectory.task_id, iteration, origin);
            all.insert(all.end(), std::make_move_iterator(updates.begin()),
                       std::make_move_iterator(updates.end()));
        } catch (const Error& e) {
            note(log, "functional extraction dropped step " + std::to_string(step.ordinal) +
                          " of task " + trajectory.task_id + ": " + e.what());
        }
    }
    return all;
}

std::vector<SkillUpdate> extract_atomic_skills(const Trajectory& trajectory,
                                               const std::string& tool,
                                               const SkillLibrary& library_snapshot,
                                               ChatGateway& chat, const TemplateSet& templates,
                                               int iteration, SkillOrigin origin,
                                               std::vector<std::string>* log) {
    const auto invoked = trajectory.invoked_tools();
    if (std::find(invoked.begin(), invoked.end(), tool) == invoked.end())
        throw std::invalid_argument("tool was never invoked in this trajectory: " + tool);

    const std::string prompt =
        templates.get("atomic_extract")
            .render({{"task", trajectory.task_text},
                     {"trajectory", render_trajectory(trajectory, chat, templates)},
                     {"library", render_library(library_snapshot)},
                     {"tool", tool}});
    const std::string reply =
        chat.complete({{{"user", prompt}}, /*temperature=*/0.0, /*max_output_tokens=*/2048});

    std::vector<SkillUpdate> out;
    bool saw_mutation = false;
    for (auto& update : parse_update_response(reply)) {
        if (update.option == UpdateOption::keep) {
            out.push_back(std::move(update));
            continue;
        }
        if (saw_mutation) {
            note(log, "atomic extraction for '" + tool + "' returned more than one add/modify; extras dropped");
            continue;
        }
        if (update.skill && update.skill->name != tool) {
            note(log, "atomic extraction for '" + tool + "' returned skill named '" +
                          update.skill->name + "'; dropped (name must be the tool)");
            continue;
        }
        stamp(update, SkillLevel::atomic, trajectory.task_id, iteration, origin);
        saw_mutation = true;
        out.push_back(std::move(update));
    }
    return out;
}

std::vector<SkillUpdate> mine_candidates(const std::vector<Trajectory>& trajectories,
                                         const SkillLibrary& library_snapshot, ChatGateway& chat,
                                         const TemplateSet& templates, int iteration,
                                         SkillOrigin origin, unsigned jobs,
                                         std::vector<std::string>* log) {
    std::vector<std::vector<SkillUpdate>> per_trajectory(trajectories.size());
    std::vector<std::vector<std::string>> per_trajectory_log(trajectories.size());

    parallel_for_indexed(trajectories.size(), jobs, [&](size_t i) {
        const Trajectory& traj = trajectories[i];
        if (!traj.success) return;  // failed rollouts never yield skills
        auto& bucket = per_trajectory[i];
        auto& local_log = per_trajectory_log[i];

        Task task{traj.task_id, traj.task_text, traj.split};
        bool have_plan = false;
        Skill plan;
        try {
            plan = extract_planning_skill(traj, task, chat, templates, iteration, origin);
            have_plan = true;
        } catch (const Error& e) {
            local_log.push_back("plan extraction failed for task " + traj.task_id + ": " +
                                e.what());
        }
        if (have_plan) {
            SkillUpdate plan_update;
            plan_update.option = UpdateOption::add;
            plan_update.skill = plan;
            bucket.push_back(std::move(plan_update));
            auto functional = extract_functional_skills(traj, plan, library_snapshot, chat,
                                                        templates, iteration, origin, &local_log);
            bucket.insert(bucket.end(), std::make_move_iterator(functional.begin()),
                          std::make_move_iterator(functional.end()));
        }
        for (const auto& tool : traj.invoked_tools()) {
            try {
                auto atomic = extract_atomic_skills(traj, tool, library_snapshot, chat, templates,
                                                    iteration, origin, &local_log);
                bucket.insert(bucket.end(), std::make_move_iterator(atomic.begin()),
                              std::make_move_iterator(atomic.end()));
            } catch (const Error& e) {
                local_log.push_back("atomic extraction failed for tool " + tool + ": " + e.what());
            }
        }
    });

    std::vector<SkillUpdate> out;
    for (size_t i = 0; i < trajectories.size(); ++i) {
        for (auto& update : per_trajectory[i]) {
            // no candidate leaves this module without passing validation
            if (update.skill) {
                const auto report = validate_skill(*update.skill);
                if (!report.ok()) {
                    if (log != nullptr)
                        log->push_back("invalid candidate '" + update.skill->name +
                                       "' dropped: " + join(report.violations, "; "));
                    continue;
                }
            }
            out.push_back(std::move(update));
        }
        if (log != nullptr)
            log->insert(log->end(), per_trajectory_log[i].begin(), per_trajectory_log[i].end());
    }
    return out;
}

}  // namespace skillx
