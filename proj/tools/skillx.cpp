#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "skillx/pipeline.hpp"
#include "skillx/store.hpp"

namespace {

// exit codes: 0 ok, 1 validation failures found, 2 usage/input error,
// 3 transport/pipeline failure
constexpr int kOk = 0;
constexpr int kValidationFindings = 1;
constexpr int kUsageError = 2;
constexpr int kPipelineError = 3;

struct CommonFlags {
    std::string config_path;
    std::string library;
    std::string schemas;
    std::string tasks;
    std::string fixture;
    std::string templates;
    std::string mock_table;
    std::string out;
    uint64_t seed = 0;
    bool seed_set = false;
    unsigned jobs = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "Pipeline config JSON");
    cmd->add_option("--library", flags.library, "Skill library file");
    cmd->add_option("--schemas", flags.schemas, "Tool schema file");
    cmd->add_option("--tasks", flags.tasks, "Task list file");
    cmd->add_option("--fixture", flags.fixture, "Toy environment fixture");
    cmd->add_option("--templates", flags.templates, "Prompt template directory");
    cmd->add_option("--mock-table", flags.mock_table, "Scripted chat mock table");
    cmd->add_option("--out", flags.out, "Output directory");
    cmd->add_option("--seed", flags.seed, "Top-level seed")->each([&](const std::string&) {
        flags.seed_set = true;
    });
    cmd->add_option("--jobs", flags.jobs, "Worker thread bound");
}

skillx::PipelineConfig resolve_config(const CommonFlags& flags) {
    skillx::PipelineConfig config;
    if (!flags.config_path.empty()) config = skillx::PipelineConfig::from_file(flags.config_path);
    // flags win over the config document
    if (!flags.library.empty()) config.library_path = flags.library;
    if (!flags.schemas.empty()) config.schemas_path = flags.schemas;
    if (!flags.tasks.empty()) config.tasks_path = flags.tasks;
    if (!flags.fixture.empty()) config.fixture_path = flags.fixture;
    if (!flags.templates.empty()) config.templates_dir = flags.templates;
    if (!flags.mock_table.empty()) config.mock_table_path = flags.mock_table;
    if (!flags.out.empty()) config.out_dir = flags.out;
    if (flags.seed_set) config.seed = flags.seed;
    if (flags.jobs > 0) config.jobs = flags.jobs;
    return config;
}

void print_report(const nlohmann::json& report) { std::cout << report.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"skillx: build, refine, expand, and serve a three-level skill library"};
    app.require_subcommand(1);

    CommonFlags flags;
    int rounds = 1;
    std::string query;
    std::string emit_prompt;

    CLI::App* build = app.add_subcommand("build", "Roll out, extract, refine once, save the library");
    add_common(build, flags);

    CLI::App* refine = app.add_subcommand("refine", "Run additional refinement rounds");
    add_common(refine, flags);
    refine->add_option("--rounds", rounds, "Refinement rounds to run")->default_val(1);

    CLI::App* expand = app.add_subcommand("expand", "Experience-guided exploration and expansion");
    add_common(expand, flags);

    CLI::App* retrieve = app.add_subcommand("retrieve", "Retrieve a skill bundle for a query");
    add_common(retrieve, flags);
    retrieve->add_option("query", query, "Task text to retrieve for")->required();
    retrieve->add_option("--emit-prompt", emit_prompt, "Write the assembled prompt section here");

    CLI::App* validate = app.add_subcommand("validate", "Audit the library against the schemas");
    add_common(validate, flags);

    CLI::App* stats = app.add_subcommand("stats", "Per-snapshot library metrics");
    add_common(stats, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        skillx::PipelineConfig config = resolve_config(flags);
        auto runtime = skillx::PipelineRuntime::open(std::move(config));

        if (build->parsed()) {
            print_report(skillx::run_build(runtime));
            return kOk;
        }
        if (refine->parsed()) {
            print_report(skillx::run_refine(runtime, rounds));
            return kOk;
        }
        if (expand->parsed()) {
            print_report(skillx::run_expand(runtime));
            return kOk;
        }
        if (retrieve->parsed()) {
            print_report(skillx::run_retrieve(runtime, query, emit_prompt));
            return kOk;
        }
        if (validate->parsed()) {
            int violations = 0;
            print_report(skillx::run_validate(runtime, violations));
            return violations > 0 ? kValidationFindings : kOk;
        }
        if (stats->parsed()) {
            print_report(skillx::run_stats(runtime));
            return kOk;
        }
        return kUsageError;
    } catch (const skillx::TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return kPipelineError;
    } catch (const skillx::IoError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kUsageError;
    } catch (const skillx::FormatError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kUsageError;
    } catch (const skillx::VersionError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsageError;
    } catch (const skillx::Error& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return kPipelineError;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return kPipelineError;
    }
}
