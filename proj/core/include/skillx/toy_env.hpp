#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "skillx/environment.hpp"

namespace skillx {

/// Deterministic multi-tool world: playlists, files, messaging, email with
/// a login prerequisite, paginated listings, and a couple of tools no seed
/// task ever needs (the expansion targets). Given (seed, action sequence),
/// every observation is byte-identical across runs.
class ToyWorld {
public:
    static ToyWorld from_fixture(const nlohmann::json& fixture, uint64_t seed);

    StepResult step(const ToolCall& call);  // throws UnknownTool

    /// Registers a task so evaluate() can resolve it. Seed tasks are
    /// pre-registered from the fixture; synthesized tasks resolve through
    /// the fixture's text-pattern evaluator table.
    void register_task(const Task& task);

    int evaluate(const std::string& task_id) const;  // throws UnknownTask

    bool has_evaluator(const std::string& task_id) const {
        return evaluators_by_task_.count(task_id) > 0;
    }

    uint64_t seed() const { return seed_; }

private:
    struct Predicate {
        std::string kind;
        nlohmann::json params;
    };

    StepResult run_tool(const std::string& tool, const nlohmann::json& args);
    bool predicate_holds(const Predicate& predicate) const;
    std::optional<std::string> check_args(const std::string& tool, const nlohmann::json& args,
                                          const std::vector<std::pair<std::string, char>>& spec) const;

    uint64_t seed_ = 0;
    int page_size_ = 2;

    // entities
    std::vector<std::string> users_;
    std::vector<std::string> contacts_;
    std::vector<nlohmann::json> files_;      // {id, name, content, size}
    std::vector<nlohmann::json> songs_;      // {id, title, genre}
    std::map<std::string, std::vector<std::string>> playlists_;  // name -> song ids
    std::map<std::string, std::string> weather_;                 // city -> report

    // mutable episode state
    bool logged_in_ = false;
    std::string current_user_;
    std::vector<nlohmann::json> emails_sent_;    // {to, subject, body}
    std::vector<nlohmann::json> messages_sent_;  // {to, text}
    std::vector<nlohmann::json> reminders_;      // {text, time}
    std::vector<std::string> weather_queries_;   // cities asked about

    // evaluation
    std::map<std::string, std::vector<Predicate>> evaluators_by_task_;
    std::vector<std::pair<std::string, std::vector<Predicate>>> synthesized_evaluators_;
};

/// Environment over a fixture document; every begin() clones a fresh world.
class ToyEnvironment : public Environment {
public:
    ToyEnvironment(nlohmann::json fixture, ToolSchemaSet schemas, uint64_t seed);

    static ToyEnvironment from_files(const std::string& fixture_path,
                                     const std::string& schemas_path, uint64_t seed);

    const ToolSchemaSet& schemas() const override { return schemas_; }
    std::unique_ptr<EpisodeSession> begin(const Task& task) override;

    const nlohmann::json& fixture() const { return fixture_; }

private:
    nlohmann::json fixture_;
    ToolSchemaSet schemas_;
    uint64_t seed_;
    ToyWorld prototype_;
};

/// Fixture-defined deterministic policy. Each seed task carries a naive
/// script and a shorter direct script; the direct one is taken only when
/// the injected skill prompt mentions every tool the direct path relies
/// on, which is the desk-scale stand-in for an LLM following retrieved
/// skills. With exploration targets set, the policy probes each target
/// tool once using fixture-supplied sample arguments.
class ScriptedPolicy : public AgentPolicy {
public:
    explicit ScriptedPolicy(const nlohmann::json& policies);

    static ScriptedPolicy from_fixture(const nlohmann::json& fixture);

    Action decide(const PolicyContext& context) override;

private:
    struct TaskScripts {
        std::vector<Action> naive;
        std::vector<Action> direct;
        std::vector<std::string> direct_requires;
    };

    static std::vector<Action> parse_script(const nlohmann::json& steps);

    std::map<std::string, TaskScripts> by_task_;
    std::vector<std::pair<std::string, std::vector<Action>>> synthesized_;  // text pattern -> script
    std::map<std::string, nlohmann::json> probe_args_;
};

}  // namespace skillx
