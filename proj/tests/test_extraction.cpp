#include <doctest.h>

#include "skillx/extraction.hpp"
#include "skillx/store.hpp"
#include "skillx/toy_env.hpp"
#include "skillx/util.hpp"

using namespace skillx;
using nlohmann::json;

namespace {

const std::string kAssets = std::string(SKILLX_ASSETS_DIR);

TemplateSet load_templates() { return TemplateSet::load_from(kAssets + "/templates"); }

ToyEnvironment make_env() {
    return ToyEnvironment::from_files(kAssets + "/fixtures/toy_world.json",
                                      kAssets + "/fixtures/tool_schemas.json", 1);
}

ScriptedPolicy make_policy() {
    return ScriptedPolicy::from_fixture(
        json::parse(read_file(kAssets + "/fixtures/toy_world.json")));
}

Task t1() {
    return {"t1", "Create a playlist called Road Trip and add the song Highway Anthem to it.",
            TaskSplit::train};
}

Trajectory success_trajectory() {
    Trajectory traj;
    traj.task_id = "t1";
    traj.task_text = t1().text;
    traj.success = true;
    TrajectoryStep step;
    step.index = 1;
    step.thought = "search first";
    step.action = {"search_songs", {{"query", "Highway Anthem"}, {"page", 1}}};
    step.observation = R"({"songs":[{"id":"s1"}]})";
    step.outcome = ToolOutcome::success;
    traj.steps.push_back(step);
    step.index = 2;
    step.action = {"create_playlist", {{"name", "Road Trip"}}};
    step.observation = R"({"created":"Road Trip"})";
    traj.steps.push_back(step);
    return traj;
}

}  // namespace

TEST_CASE("rollout: scripted solution solves the task") {
    auto env = make_env();
    auto policy = make_policy();
    const auto batch = rollout(t1(), policy, env, /*m=*/1, /*temperature=*/0.9);
    REQUIRE(batch.size() == 1);
    CHECK(batch[0].success);
    CHECK(batch[0].steps.size() == 7);  // fixture naive script length
    CHECK(batch[0].rollout_index == 1);
}

TEST_CASE("rollout: m deterministic rollouts are identical") {
    auto env = make_env();
    auto policy = make_policy();
    auto batch = rollout(t1(), policy, env, /*m=*/4, 0.9);
    REQUIRE(batch.size() == 4);
    for (int i = 1; i < 4; ++i) {
        CHECK(batch[size_t(i)].steps == batch[0].steps);
        CHECK(batch[size_t(i)].success == batch[0].success);
        CHECK(batch[size_t(i)].rollout_index == i + 1);
    }
}

TEST_CASE("rollout: a looping policy hits the step cap with success=false") {
    struct LoopingPolicy : AgentPolicy {
        Action decide(const PolicyContext&) override {
            Action action;
            action.call = {"list_contacts", json::object()};
            return action;
        }
    };
    auto env = make_env();
    LoopingPolicy policy;
    const auto batch = rollout(t1(), policy, env, 1, 0.0, /*step_cap=*/5);
    REQUIRE(batch.size() == 1);
    CHECK(batch[0].steps.size() == 5);
    CHECK_FALSE(batch[0].success);
}

TEST_CASE("summarize_feedback passes short and boundary observations through") {
    EchoChatGateway echo;
    const auto templates = load_templates();
    const std::string short_obs = "only a few tokens here";
    CHECK(summarize_feedback(short_obs, echo, templates).text == short_obs);

    // exactly at the limit: "exceeding" is strict, so passthrough
    std::vector<std::string> tokens(kFeedbackTokenLimit, "tok");
    const std::string at_limit = join(tokens, " ");
    const auto result = summarize_feedback(at_limit, echo, templates);
    CHECK(result.text == at_limit);
    CHECK_FALSE(result.fallback_truncated);
}

TEST_CASE("summarize_feedback: long observation goes through the gateway") {
    ScriptedChatGateway mock;
    mock.add_contains_rule({"analyzing agent trajectories"},
                           "<feedback>API listed 25 playlists</feedback>");
    const auto templates = load_templates();
    std::vector<std::string> tokens(2000, "word");
    const auto result = summarize_feedback(join(tokens, " "), mock, templates);
    CHECK(result.text == "API listed 25 playlists");
    CHECK_FALSE(result.fallback_truncated);
}

TEST_CASE("summarize_feedback: tagless replies fall back to hard truncation") {
    ScriptedChatGateway mock;
    mock.add_contains_rule({"analyzing agent trajectories"}, "no tags in this reply");
    const auto templates = load_templates();
    std::vector<std::string> tokens(1600, "w");
    const auto result = summarize_feedback(join(tokens, " "), mock, templates, 1500);
    CHECK(result.fallback_truncated);
    CHECK(whitespace_token_count(result.text) == 1500);
    CHECK(mock.call_count() == 2);  // one retry before the fallback
}

TEST_CASE("parse_update_response: fenced add, empty list, schema errors") {
    const std::string fenced = "```json\n[{\"option\":\"add\",\"skill\":{\"name\":\"x\","
                               "\"document\":\"d\",\"content\":\"x(a=1)\",\"tools\":[\"x\"]}}]\n```";
    const auto updates = parse_update_response(fenced);
    REQUIRE(updates.size() == 1);
    CHECK(updates[0].option == UpdateOption::add);
    CHECK(updates[0].skill->name == "x");

    CHECK(parse_update_response("[]").empty());

    CHECK_THROWS_AS(parse_update_response("not json"), ParseError);
    CHECK_THROWS_AS(parse_update_response(R"([{"option":"add"}])"), SchemaError);
    CHECK_THROWS_AS(parse_update_response(R"([{"option":"modify","skill":{}}])"), SchemaError);
    CHECK_THROWS_AS(parse_update_response(R"([{"option":"retire","skill_name":"x"}])"),
                    SchemaError);
}

TEST_CASE("parse_update_response: keep and modify field handling") {
    const auto keeps = parse_update_response(R"([{"option":"keep","skill_name":"x"}])");
    REQUIRE(keeps.size() == 1);
    CHECK(keeps[0].option == UpdateOption::keep);
    CHECK(keeps[0].kept_name == "x");

    const std::string modify = R"([{"option":"modify","modified_from":"spotify get all user playlists",
        "skill":{"name":"spotify get all user playlists","document":"d","content":"c(x=1)","tools":["c"]}}])";
    const auto updates = parse_update_response(modify);
    REQUIRE(updates.size() == 1);
    CHECK(updates[0].option == UpdateOption::modify);
    CHECK(updates[0].modified_from == "spotify get all user playlists");
}

TEST_CASE("extract_planning_skill parses the plan block in order") {
    ScriptedChatGateway mock;
    mock.add_contains_rule({"Planning Expert"},
                           "<plan>\n# step 1: find playlist; apis: list_playlists\n"
                           "# step 2: add the song; apis: add_song_to_playlist\n"
                           "# step 3: verify the playlist; apis: get_playlist\n</plan>");
    const auto templates = load_templates();
    const Skill plan =
        extract_planning_skill(success_trajectory(), t1(), mock, templates, /*iteration=*/1);
    CHECK(plan.level == SkillLevel::planning);
    CHECK(plan.source_task_text == t1().text);
    const auto steps = parse_plan_steps(plan.content);
    REQUIRE(steps.size() == 3);
    CHECK(steps[0].ordinal == 1);
    CHECK(steps[1].goal_text == "add the song");
    CHECK(steps[2].key_tools == std::vector<std::string>{"get_playlist"});
    CHECK(validate_skill(plan).ok());
}

TEST_CASE("extract_planning_skill error contracts") {
    const auto templates = load_templates();

    Trajectory failed = success_trajectory();
    failed.success = false;
    EchoChatGateway echo;
    CHECK_THROWS_AS(extract_planning_skill(failed, t1(), echo, templates, 1),
                    std::invalid_argument);

    ScriptedChatGateway tagless;
    tagless.add_contains_rule({"Planning Expert"}, "no plan markup");
    CHECK_THROWS_AS(extract_planning_skill(success_trajectory(), t1(), tagless, templates, 1),
                    ParseError);

    ScriptedChatGateway empty;
    empty.add_contains_rule({"Planning Expert"}, "<plan>\nnothing structured\n</plan>");
    CHECK_THROWS_AS(extract_planning_skill(success_trajectory(), t1(), empty, templates, 1),
                    EmptyPlan);
}

TEST_CASE("extract_functional_skills: one chat call per plan step") {
    ScriptedChatGateway mock;
    mock.add_contains_rule({"Specific-step guided extraction"},
                           R"([{"option":"add","skill":{"name":"step skill","document":"d",
                                "content":"list_playlists(page=1)","tools":["list_playlists"]}}])");
    const auto templates = load_templates();

    Skill plan;
    plan.level = SkillLevel::planning;
    plan.name = "plan: t1";
    plan.document = "d";
    plan.content = "# step 1: inspect playlists; apis: list_playlists\n# step 2: add the song";
    plan.source_task_text = t1().text;

    const auto updates = extract_functional_skills(success_trajectory(), plan, SkillLibrary{},
                                                   mock, templates, 1, SkillOrigin::extracted);
    CHECK(mock.call_count_containing("Specific-step guided extraction") == 2);
    REQUIRE(updates.size() == 2);
    CHECK(updates[0].skill->level == SkillLevel::functional);
    CHECK(updates[0].skill->provenance.source_task_id == "t1");
}

TEST_CASE("extract_functional_skills: a bad step reply drops only that step") {
    ScriptedChatGateway mock;
    mock.add_contains_rule({"# step 1:"}, "garbage");
    mock.add_contains_rule({"# step 2:"},
                           R"([{"option":"keep","skill_name":"existing"}])");
    const auto templates = load_templates();
    Skill plan;
    plan.level = SkillLevel::planning;
    plan.name = "plan: t1";
    plan.document = "d";
    plan.content = "# step 1: will fail\n# step 2: will keep";
    plan.source_task_text = t1().text;

    std::vector<std::string> log;
    const auto updates = extract_functional_skills(success_trajectory(), plan, SkillLibrary{},
                                                   mock, templates, 1, SkillOrigin::extracted,
                                                   &log);
    REQUIRE(updates.size() == 1);
    CHECK(updates[0].option == UpdateOption::keep);
    REQUIRE(log.size() == 1);
    CHECK(contains(log[0], "step 1"));
}

TEST_CASE("extract_atomic_skills: tool focus and preconditions") {
    ScriptedChatGateway mock;
    mock.add_contains_rule({"Specific-Tool: search_songs"},
                           R"([{"option":"add","skill":{"name":"search_songs","document":"d",
                                "content":"search_songs(query=q, page=1)","tools":["search_songs"]}}])");
    const auto templates = load_templates();

    const auto updates = extract_atomic_skills(success_trajectory(), "search_songs",
                                               SkillLibrary{}, mock, templates, 1,
                                               SkillOrigin::extracted);
    REQUIRE(updates.size() == 1);
    CHECK(updates[0].skill->level == SkillLevel::atomic);
    CHECK(updates[0].skill->name == "search_songs");

    EchoChatGateway echo;
    CHECK_THROWS_AS(extract_atomic_skills(success_trajectory(), "send_email", SkillLibrary{},
                                          echo, templates, 1, SkillOrigin::extracted),
                    std::invalid_argument);
}

TEST_CASE("extract_atomic_skills: wrong-name adds are dropped, extras capped") {
    ScriptedChatGateway mock;
    mock.add_contains_rule(
        {"Specific-Tool: search_songs"},
        R"([{"option":"add","skill":{"name":"wrong_tool","document":"d","content":"c(x=1)","tools":["c"]}},
            {"option":"add","skill":{"name":"search_songs","document":"d","content":"search_songs(query=q, page=1)","tools":["search_songs"]}}])");
    const auto templates = load_templates();
    std::vector<std::string> log;
    const auto updates = extract_atomic_skills(success_trajectory(), "search_songs",
                                               SkillLibrary{}, mock, templates, 1,
                                               SkillOrigin::extracted, &log);
    REQUIRE(updates.size() == 1);
    CHECK(updates[0].skill->name == "search_songs");
    CHECK(log.size() == 1);
}

TEST_CASE("mine_candidates skips failed trajectories entirely") {
    ScriptedChatGateway mock;  // no rules: every parse fails, but it must not even be called
    const auto templates = load_templates();
    Trajectory failed = success_trajectory();
    failed.success = false;
    const auto candidates = mine_candidates({failed}, SkillLibrary{}, mock, templates, 1,
                                            SkillOrigin::extracted);
    CHECK(candidates.empty());
    CHECK(mock.call_count() == 0);
}
