#include "skillx/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

#include "skillx/util.hpp"

namespace skillx {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string zero_pad(int value, int width = 4) {
    std::string s = std::to_string(value);
    while (int(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

void save_round_artifacts(PipelineRuntime& runtime, int round,
                          const std::vector<Trajectory>& trajectories) {
    // one file per task; a task's m rollouts share the file
    std::map<std::string, std::vector<Trajectory>> by_task;
    for (const auto& traj : trajectories) by_task[traj.task_id].push_back(traj);
    const std::string dir =
        runtime.config.trajectory_dir() + "/round-" + zero_pad(round);
    for (const auto& [task_id, batch] : by_task)
        save_trajectories(batch, dir + "/" + task_id + ".jsonl");
}

std::string snapshot_path(const PipelineRuntime& runtime, int iteration) {
    return runtime.config.snapshot_dir() + "/library.iter-" + zero_pad(iteration) + ".json";
}

void save_snapshots(PipelineRuntime& runtime, const std::vector<SkillLibrary>& snapshots) {
    for (const auto& snapshot : snapshots)
        save_library(snapshot, snapshot_path(runtime, snapshot.iteration()));
}

uint64_t derived_seed(uint64_t base, uint64_t salt) {
    uint64_t state = base ^ (salt * 0x9e3779b97f4a7c15ULL);
    return splitmix64(state);
}

}  // namespace

PipelineRuntime PipelineRuntime::open(PipelineConfig config) {
    config.validate();
    PipelineRuntime runtime(config);

    if (!config.mock_table_path.empty()) {
        runtime.chat = std::make_unique<ScriptedChatGateway>(
            ScriptedChatGateway::from_file(config.mock_table_path));
        runtime.embedder = std::make_unique<HashEmbeddingGateway>(
            config.embedding_dimension, derived_seed(config.seed, /*salt=*/11));
    } else {
        auto chat_config = chat_gateway_config_from_env();
        auto embed_config = embed_gateway_config_from_env();
        if (!chat_config || !embed_config)
            throw FormatError(
                "no gateways configured: set SKILLX_CHAT_URL and SKILLX_EMBED_URL or pass a "
                "mock table");
        chat_config->model = config.chat_model;
        chat_config->retry = {config.retry_attempts, config.retry_backoff_ms};
        embed_config->model = config.embed_model;
        embed_config->retry = {config.retry_attempts, config.retry_backoff_ms};
        runtime.chat = std::make_unique<HttpChatGateway>(*chat_config);
        runtime.embedder =
            std::make_unique<HttpEmbeddingGateway>(*embed_config, config.embedding_dimension);
    }

    runtime.templates = TemplateSet::load_from(config.templates_dir);
    runtime.schemas = load_tool_schemas(config.schemas_path);
    if (!config.fixture_path.empty()) {
        runtime.environment = std::make_unique<ToyEnvironment>(ToyEnvironment::from_files(
            config.fixture_path, config.schemas_path, derived_seed(config.seed, /*salt=*/23)));
        runtime.policy = std::make_unique<ScriptedPolicy>(
            ScriptedPolicy::from_fixture(runtime.environment->fixture()));
    }
    return runtime;
}

IterateContext PipelineRuntime::iterate_context() {
    IterateContext context{*chat,     *embedder, *cache,     templates,
                           schemas,   config.refinement,     config.retrieval};
    context.rollouts_per_task = config.rollouts_per_task;
    context.temperature = config.extraction_temperature;
    context.step_cap = config.step_cap;
    context.jobs = config.jobs;
    context.log = &log;
    return context;
}

json run_build(PipelineRuntime& runtime) {
    const auto tasks = load_tasks(runtime.config.tasks_path);

    std::vector<json> reports;
    IterateContext context = runtime.iterate_context();
    context.trajectory_sink = [&](int round, const std::vector<Trajectory>& trajectories) {
        save_round_artifacts(runtime, round, trajectories);
    };
    context.report_sink = [&](const RefineReport& report) { reports.push_back(report.to_json()); };

    const SkillLibrary empty;
    const auto snapshots =
        iterate(empty, tasks, *runtime.policy, *runtime.environment, /*rounds=*/1, context);
    save_snapshots(runtime, snapshots);
    const std::string digest = save_library(snapshots.back(), runtime.config.library_path);

    json sizes = json::array();
    for (const auto& snapshot : snapshots) sizes.push_back(snapshot.size());
    json report = {{"command", "build"},
                   {"tasks", tasks.size()},
                   {"snapshot_sizes", sizes},
                   {"library", runtime.config.library_path},
                   {"digest", digest},
                   {"rounds", reports}};
    if (tasks.empty()) report["warning"] = "no tasks given; library left empty";
    for (const auto& round : reports) write_file_atomic(
        runtime.config.report_dir() + "/refine-" + zero_pad(round.at("iteration").get<int>()) +
            ".json",
        canonical_dump(round));
    return report;
}

json run_refine(PipelineRuntime& runtime, int rounds) {
    SkillLibrary library = load_library(runtime.config.library_path);
    if (rounds == 0)
        return json{{"command", "refine"}, {"rounds", 0}, {"digest", library_digest(library)}};

    std::vector<json> reports;
    IterateContext context = runtime.iterate_context();
    const int base_round = library.iteration();
    context.trajectory_sink = [&](int round, const std::vector<Trajectory>& trajectories) {
        save_round_artifacts(runtime, base_round + round, trajectories);
    };
    context.report_sink = [&](const RefineReport& report) { reports.push_back(report.to_json()); };

    const auto tasks = load_tasks(runtime.config.tasks_path);
    const auto snapshots =
        iterate(library, tasks, *runtime.policy, *runtime.environment, rounds, context);
    save_snapshots(runtime, snapshots);
    const std::string digest = save_library(snapshots.back(), runtime.config.library_path);

    for (const auto& round : reports) write_file_atomic(
        runtime.config.report_dir() + "/refine-" + zero_pad(round.at("iteration").get<int>()) +
            ".json",
        canonical_dump(round));
    json sizes = json::array();
    for (const auto& snapshot : snapshots) sizes.push_back(snapshot.size());
    return json{{"command", "refine"},
                {"rounds", rounds},
                {"snapshot_sizes", sizes},
                {"digest", digest},
                {"reports", reports}};
}

std::vector<Trajectory> load_all_trajectories(const PipelineRuntime& runtime) {
    std::vector<Trajectory> all;
    const fs::path root(runtime.config.trajectory_dir());
    if (!fs::exists(root)) return all;
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        auto batch = load_trajectories(file.string());
        all.insert(all.end(), std::make_move_iterator(batch.begin()),
                   std::make_move_iterator(batch.end()));
    }
    return all;
}

json run_expand(PipelineRuntime& runtime) {
    SkillLibrary library = load_library(runtime.config.library_path);
    const auto experience = load_all_trajectories(runtime);
    if (experience.empty()) throw FormatError("no experience to guide exploration");

    const auto stats = compute_tool_stats(experience, runtime.schemas);
    const auto directive = guided_directive(stats, runtime.config.expansion);

    const auto seed_tasks = load_tasks(runtime.config.tasks_path);
    const auto exploratory = explore(*runtime.environment, directive, seed_tasks, *runtime.policy,
                                     runtime.config.step_cap, &runtime.log);

    std::vector<std::string> sources;
    const auto synthesized = synthesize_tasks(exploratory, *runtime.chat, runtime.templates,
                                              runtime.schemas, &runtime.log, &sources);

    // synthesized-task log: one JSON object per line
    std::string lines;
    for (size_t i = 0; i < synthesized.size(); ++i) {
        lines += json{{"id", synthesized[i].id},
                      {"text", synthesized[i].text},
                      {"split", "synthesized"},
                      {"source_trajectory", i < sources.size() ? sources[i] : ""}}
                     .dump() +
                 "\n";
    }
    write_file_atomic(runtime.config.out_dir + "/synthesized_tasks.jsonl", lines);

    IterateContext context = runtime.iterate_context();
    const int base_round = library.iteration();
    context.trajectory_sink = [&](int round, const std::vector<Trajectory>& trajectories) {
        save_round_artifacts(runtime, base_round + round, trajectories);
    };
    const SkillLibrary expanded =
        expand(library, synthesized, *runtime.policy, *runtime.environment, context);

    save_library(expanded, snapshot_path(runtime, expanded.iteration()));
    const std::string digest = save_library(expanded, runtime.config.library_path);

    json targets = json::array();
    for (const auto& tool : directive.target_tools) targets.push_back(tool);
    return json{{"command", "expand"},
                {"targets", targets},
                {"exploratory_trajectories", exploratory.size()},
                {"synthesized_tasks", synthesized.size()},
                {"library_size", expanded.size()},
                {"digest", digest}};
}

json run_retrieve(PipelineRuntime& runtime, const std::string& query,
                  const std::string& emit_prompt_path) {
    const SkillLibrary library = load_library(runtime.config.library_path);
    Retriever retriever(library, *runtime.chat, *runtime.embedder, *runtime.cache,
                        runtime.templates, runtime.config.retrieval);
    const RetrievalBundle bundle = retriever.retrieve(query);
    if (!emit_prompt_path.empty())
        write_file_atomic(emit_prompt_path, assemble_prompt(bundle, runtime.config.retrieval));
    return bundle.to_json();
}

json run_validate(PipelineRuntime& runtime, int& violations) {
    const SkillLibrary library = load_library(runtime.config.library_path);
    violations = 0;
    json findings = json::array();
    for (const auto& [name, skill] : library.skills()) {
        std::vector<std::string> problems = validate_skill(skill).violations;
        const auto schema_report = tool_schema_static_check(skill, runtime.schemas);
        problems.insert(problems.end(), schema_report.violations.begin(),
                        schema_report.violations.end());
        if (!problems.empty()) {
            violations += int(problems.size());
            findings.push_back({{"skill", name}, {"violations", problems}});
        }
    }
    return json{{"command", "validate"},
                {"skills", library.size()},
                {"violations", violations},
                {"findings", findings}};
}

json run_stats(PipelineRuntime& runtime) {
    const fs::path dir(runtime.config.snapshot_dir());
    std::vector<fs::path> files;
    if (fs::exists(dir)) {
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty() && fs::exists(runtime.config.library_path))
        files.push_back(runtime.config.library_path);

    json rows = json::array();
    for (const auto& file : files) {
        const SkillLibrary library = load_library(file.string());
        int planning = 0, functional = 0, atomic = 0;
        std::set<std::string> tools;
        for (const auto& [name, skill] : library.skills()) {
            switch (skill.level) {
                case SkillLevel::planning: ++planning; break;
                case SkillLevel::functional: ++functional; break;
                case SkillLevel::atomic: ++atomic; break;
            }
            for (const auto& tool : skill.tools)
                if (runtime.schemas.contains(tool)) tools.insert(tool);
        }
        int adds = 0, modifies = 0;
        for (const auto& entry : library.update_log()) {
            if (entry.iteration != library.iteration()) continue;
            if (entry.option == UpdateOption::add) ++adds;
            if (entry.option == UpdateOption::modify) ++modifies;
        }
        const double coverage =
            runtime.schemas.size() == 0 ? 0.0 : double(tools.size()) / double(runtime.schemas.size());
        rows.push_back({{"iteration", library.iteration()},
                        {"size", library.size()},
                        {"by_level",
                         {{"planning", planning}, {"functional", functional}, {"atomic", atomic}}},
                        {"tool_coverage", coverage},
                        {"updates", {{"add", adds}, {"modify", modifies}}}});
    }
    return json{{"command", "stats"}, {"snapshots", rows}};
}

}  // namespace skillx
