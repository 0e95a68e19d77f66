#include <doctest.h>

#include "skillx/baseline.hpp"
#include "skillx/store.hpp"
#include "skillx/toy_env.hpp"

using namespace skillx;
using nlohmann::json;

namespace {

const std::string kAssets = std::string(SKILLX_ASSETS_DIR);

struct ProbeHarness {
    ToyEnvironment env = ToyEnvironment::from_files(kAssets + "/fixtures/toy_world.json",
                                                    kAssets + "/fixtures/tool_schemas.json", 1);
    ScriptedPolicy policy =
        ScriptedPolicy::from_fixture(json::parse(read_file(kAssets + "/fixtures/toy_world.json")));
    std::vector<Task> tasks = load_tasks(kAssets + "/fixtures/tasks.json");
};

}  // namespace

TEST_CASE("baseline: the fixture's naive scripts solve every seed task") {
    ProbeHarness harness;
    const auto result = run_baseline(harness.tasks, harness.policy, harness.env, /*m=*/1);
    CHECK(result.avg_at_m == 1.0);
    CHECK(result.pass_at_m == 1.0);
    CHECK(result.mean_steps > 0.0);
    CHECK(result.trajectories.size() == harness.tasks.size());
}

TEST_CASE("baseline: deterministic policies collapse Avg@4 onto Pass@4") {
    ProbeHarness harness;
    const auto result = run_baseline(harness.tasks, harness.policy, harness.env, /*m=*/4);
    CHECK(result.avg_at_m == result.pass_at_m);
    CHECK(result.trajectories.size() == harness.tasks.size() * 4);
}

TEST_CASE("conditioned run with an empty library is bit-identical to baseline") {
    ProbeHarness harness;
    ScriptedChatGateway chat;
    HashEmbeddingGateway embedder(128, 3);
    EmbeddingCache cache;
    const auto templates = TemplateSet::load_from(kAssets + "/templates");

    const auto base = run_baseline(harness.tasks, harness.policy, harness.env, 2);
    const auto conditioned = run_conditioned(harness.tasks, harness.policy, harness.env,
                                             SkillLibrary{}, chat, embedder, cache, templates, 2);
    REQUIRE(base.trajectories.size() == conditioned.trajectories.size());
    CHECK(trajectories_to_jsonl(base.trajectories) ==
          trajectories_to_jsonl(conditioned.trajectories));
    CHECK(chat.call_count() == 0);
}

TEST_CASE("metrics json shape") {
    ProbeHarness harness;
    const auto result = run_baseline({harness.tasks[0]}, harness.policy, harness.env, 1);
    const json doc = result.to_json();
    CHECK(doc.contains("avg_at_m"));
    CHECK(doc.contains("pass_at_m"));
    CHECK(doc.contains("mean_steps"));
    REQUIRE(doc.at("per_task").size() == 1);
    CHECK(doc.at("per_task")[0].at("task_id") == "t1");
}
