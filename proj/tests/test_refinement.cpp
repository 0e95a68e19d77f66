#include <doctest.h>

#include <cmath>

#include "density_oracle.hpp"
#include "skillx/refinement.hpp"
#include "skillx/store.hpp"
#include "test_support.hpp"

using namespace skillx;
using nlohmann::json;
using testsupport::density_oracle;
using testsupport::make_atomic;
using testsupport::make_functional;

namespace {

const std::string kAssets = std::string(SKILLX_ASSETS_DIR);

TemplateSet load_templates() { return TemplateSet::load_from(kAssets + "/templates"); }

ToolSchemaSet load_schemas() {
    return load_tool_schemas(kAssets + "/fixtures/tool_schemas.json");
}

/// Planar unit vectors let tests place pairwise cosines exactly.
Vec at_angle(double radians) {
    return {float(std::cos(radians)), float(std::sin(radians))};
}

std::vector<SkillEmbedding> embeddings_for(const std::vector<Skill>& skills,
                                           const std::vector<Vec>& vectors) {
    std::vector<SkillEmbedding> out;
    for (size_t i = 0; i < skills.size(); ++i)
        out.push_back({skills[i].name, vectors[i], ""});
    return out;
}

std::vector<Skill> numbered_skills(size_t n) {
    std::vector<Skill> skills;
    for (size_t i = 0; i < n; ++i)
        skills.push_back(make_functional("skill_" + std::to_string(i), "doc", "list_contacts()",
                                         {"list_contacts"}));
    return skills;
}

}  // namespace

TEST_CASE("cluster_skills: a chained cluster plus an isolated point") {
    // cos(A,B) ~ .995, cos(B,C) ~ .995, cos(A,C) ~ .98 >= .9; D far away
    const double eps_angle = 0.1;
    std::vector<Vec> vectors = {at_angle(0.0), at_angle(eps_angle), at_angle(2 * eps_angle),
                                at_angle(1.5)};
    auto skills = numbered_skills(4);
    const auto result = cluster_skills(skills, embeddings_for(skills, vectors), {});
    REQUIRE(result.clusters.size() == 1);
    CHECK(result.clusters[0].members ==
          std::vector<std::string>{"skill_0", "skill_1", "skill_2"});
    CHECK(result.noise_indices == std::vector<size_t>{3});
}

TEST_CASE("cluster_skills: all pairs below threshold means all noise") {
    std::vector<Vec> vectors = {at_angle(0.0), at_angle(0.8), at_angle(1.6)};
    auto skills = numbered_skills(3);
    const auto result = cluster_skills(skills, embeddings_for(skills, vectors), {});
    CHECK(result.clusters.empty());
    CHECK(result.noise_indices.size() == 3);
}

TEST_CASE("cluster_skills: oversized clusters truncate to the cap, medoid kept") {
    std::vector<Vec> vectors;
    std::vector<Skill> skills;
    for (int i = 0; i < 20; ++i) {
        vectors.push_back(at_angle(0.001 * i));
        skills.push_back(make_functional("s" + std::to_string(i < 10 ? "0" : "") +
                                             std::to_string(i),
                                         "doc", "list_contacts()", {"list_contacts"}));
    }
    const auto result = cluster_skills(skills, embeddings_for(skills, vectors), {});
    REQUIRE(result.clusters.size() == 1);
    CHECK(result.clusters[0].members.size() == 15);
    CHECK(result.truncated_indices.size() == 5);
    // the medoid survives its own truncation
    const auto& members = result.clusters[0].members;
    CHECK(std::find(members.begin(), members.end(), result.clusters[0].medoid) != members.end());
}

TEST_CASE("cluster_skills refuses mixed levels") {
    std::vector<Skill> skills = {make_functional("f", "d", "list_contacts()", {"list_contacts"}),
                                 make_atomic("login", "d", "login(username=u)")};
    std::vector<Vec> vectors = {at_angle(0), at_angle(0)};
    CHECK_THROWS_AS(cluster_skills(skills, embeddings_for(skills, vectors), {}),
                    std::invalid_argument);
}

TEST_CASE("cluster_skills matches the O(n^2) density oracle on random instances") {
    const DeterministicRng rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        const size_t n = 2 + rng.uniform_int(5, uint64_t(trial), 60);
        std::vector<Vec> vectors;
        std::vector<Skill> skills;
        for (size_t i = 0; i < n; ++i) {
            // angles concentrated so some pairs pass the 0.9 threshold
            const double angle = rng.uniform(6, uint64_t(trial) * 1000 + i) * 1.2;
            vectors.push_back(at_angle(angle));
            std::string name = "p" + std::to_string(i);
            skills.push_back(make_functional(name, "d", "list_contacts()", {"list_contacts"}));
        }
        const auto mine = cluster_skills(skills, embeddings_for(skills, vectors), {});
        const auto oracle = density_oracle(vectors, 0.9);

        // compare partitions up to relabeling via sorted member-index sets
        std::vector<std::vector<size_t>> got;
        for (const auto& cluster : mine.clusters) {
            std::vector<size_t> indices = cluster.member_indices;
            std::sort(indices.begin(), indices.end());
            got.push_back(indices);
        }
        std::sort(got.begin(), got.end());
        CHECK(got == oracle.clusters);

        std::vector<size_t> noise = mine.noise_indices;
        std::sort(noise.begin(), noise.end());
        CHECK(noise == oracle.noise);
    }
}

TEST_CASE("every cluster member has a >= 0.9 witness inside the cluster") {
    const DeterministicRng rng(78);
    std::vector<Vec> vectors;
    std::vector<Skill> skills;
    for (size_t i = 0; i < 40; ++i) {
        vectors.push_back(at_angle(rng.uniform(2, i) * 0.9));
        skills.push_back(make_functional("w" + std::to_string(i), "d", "list_contacts()",
                                         {"list_contacts"}));
    }
    const auto embeddings = embeddings_for(skills, vectors);
    const auto result = cluster_skills(skills, embeddings, {});
    for (const auto& cluster : result.clusters) {
        for (size_t a : cluster.member_indices) {
            bool witness = false;
            for (size_t b : cluster.member_indices) {
                if (a != b && cosine_similarity(vectors[a], vectors[b]) >= 0.9) witness = true;
            }
            CHECK(witness);
        }
    }
}

TEST_CASE("merge_cluster: consolidation, decomposition, and failure modes") {
    const auto templates = load_templates();
    std::vector<Skill> skills = {
        make_functional("fetch pages", "d1", "list_files(page=1)", {"list_files"}),
        make_functional("fetch pages again", "d2", "list_files(page=1)", {"list_files"})};
    SkillCluster cluster;
    cluster.members = {"fetch pages", "fetch pages again"};
    cluster.member_indices = {0, 1};
    cluster.level = SkillLevel::functional;
    cluster.medoid = "fetch pages";

    ScriptedChatGateway one;
    one.add_contains_rule({"merge skills that are meaningfully similar"},
                          "<skill>[{\"name\":\"file page fetch\",\"document\":\"d\","
                          "\"content\":\"list_files(page=1)\",\"tools\":[\"list_files\"]}]</skill>");
    const auto merged = merge_cluster(cluster, skills, one, templates, 1);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].name == "file page fetch");
    CHECK(merged[0].provenance.origin == SkillOrigin::merged);

    ScriptedChatGateway two;
    two.add_contains_rule({"merge skills"},
                          "<skill>[{\"name\":\"a\",\"document\":\"d\",\"content\":\"list_files(page=1)\",\"tools\":[\"list_files\"]},"
                          "{\"name\":\"b\",\"document\":\"d\",\"content\":\"read_file(file_id=f)\",\"tools\":[\"read_file\"]}]</skill>");
    CHECK(merge_cluster(cluster, skills, two, templates, 1).size() == 2);

    ScriptedChatGateway bad;
    bad.add_contains_rule({"merge skills"}, "no block here");
    CHECK_THROWS_AS(merge_cluster(cluster, skills, bad, templates, 1), ParseError);

    SkillCluster singleton = cluster;
    singleton.member_indices = {0};
    CHECK_THROWS_AS(merge_cluster(singleton, skills, one, templates, 1), std::invalid_argument);
}

TEST_CASE("general_filter verdict normalization") {
    const auto templates = load_templates();
    const Skill skill = make_functional("x", "d", "list_contacts()", {"list_contacts"});

    ScriptedChatGateway good;
    good.add_contains_rule({"quality is good or bad"}, "good");
    CHECK(general_filter(skill, good, templates));

    ScriptedChatGateway shouting;
    shouting.add_contains_rule({"quality is good or bad"}, "GOOD.");
    CHECK(general_filter(skill, shouting, templates));

    ScriptedChatGateway bad;
    bad.add_contains_rule({"quality is good or bad"}, "bad");
    CHECK_FALSE(general_filter(skill, bad, templates));

    ScriptedChatGateway rambling;
    rambling.add_contains_rule({"quality is good or bad"}, "I think it depends");
    CHECK_FALSE(general_filter(skill, rambling, templates));
    CHECK(rambling.call_count() == 2);  // retried once, then conservative
}

TEST_CASE("tool_schema_static_check catches the three fault families") {
    const auto schemas = load_schemas();

    const Skill ghost = make_functional("g", "d", "frobnicate(x=1)", {"frobnicate"});
    const auto ghost_report = tool_schema_static_check(ghost, schemas);
    REQUIRE_FALSE(ghost_report.ok());
    CHECK(contains(ghost_report.violations.front(), "nonexistent tool"));

    const Skill missing =
        make_functional("m", "d", "send_email(to=recipient)", {"send_email"});
    bool found_missing = false;
    for (const auto& violation : tool_schema_static_check(missing, schemas).violations)
        if (contains(violation, "required parameter 'subject'")) found_missing = true;
    CHECK(found_missing);

    const Skill mismatch =
        make_functional("t", "d", "list_files(page='one')", {"list_files"});
    bool found_type = false;
    for (const auto& violation : tool_schema_static_check(mismatch, schemas).violations)
        if (contains(violation, "expects integer")) found_type = true;
    CHECK(found_type);

    const Skill unknown_param =
        make_functional("u", "d", "read_file(file_id=f, mode='fast')", {"read_file"});
    bool found_unknown = false;
    for (const auto& violation : tool_schema_static_check(unknown_param, schemas).violations)
        if (contains(violation, "unknown parameter 'mode'")) found_unknown = true;
    CHECK(found_unknown);
}

TEST_CASE("tool_schema_static_check accepts clean skills and ellipsis call sites") {
    const auto schemas = load_schemas();
    CHECK(tool_schema_static_check(
              make_functional("ok", "d",
                              "login(username=account)\nsend_email(to=r, subject=s, body=b)",
                              {"login", "send_email"}),
              schemas)
              .ok());
    // "..." marks caller-supplied arguments
    CHECK(tool_schema_static_check(
              make_functional("dots", "d", "send_email(...)", {"send_email"}), schemas)
              .ok());
}

TEST_CASE("tool_schema_llm_check parses answers and falls back to fail") {
    const auto templates = load_templates();
    const auto schemas = load_schemas();
    const Skill skill = make_functional("x", "d", "list_contacts()", {"list_contacts"});

    ScriptedChatGateway correct;
    correct.add_contains_rule({"tool-invocation expert"}, "<answer>correct</answer>");
    CHECK(tool_schema_llm_check(skill, schemas, correct, templates));

    ScriptedChatGateway reasoning;
    reasoning.add_contains_rule({"tool-invocation expert"},
                                "the call omits a prerequisite... <answer>fail</answer>");
    CHECK_FALSE(tool_schema_llm_check(skill, schemas, reasoning, templates));

    ScriptedChatGateway tagless;
    tagless.add_contains_rule({"tool-invocation expert"}, "no verdict");
    CHECK_FALSE(tool_schema_llm_check(skill, schemas, tagless, templates));
    CHECK(tagless.call_count() == 2);
}

namespace {

/// Scripted mocks for a small refine run: two near-duplicates merge, one
/// skill flunks the general filter.
ScriptedChatGateway refine_mocks() {
    ScriptedChatGateway mock;
    mock.add_contains_rule({"merge skills that are meaningfully similar", "page walker"},
                           "<skill>[{\"name\":\"page walker\",\"document\":\"walks pages\","
                           "\"content\":\"list_files(page=1)\",\"tools\":[\"list_files\"]}]</skill>");
    mock.add_contains_rule({"quality is good or bad", "sloppy wrapper"}, "bad");
    mock.add_contains_rule({"quality is good or bad"}, "good");
    mock.add_contains_rule({"tool-invocation expert"}, "<answer>correct</answer>");
    return mock;
}

std::vector<SkillUpdate> refine_candidates() {
    std::vector<SkillUpdate> updates;
    for (const char* doc : {"walks listing pages", "walks the listing pages"}) {
        SkillUpdate u;
        u.option = UpdateOption::add;
        u.skill = make_functional("page walker", doc, "list_files(page=1)", {"list_files"});
        updates.push_back(u);
    }
    SkillUpdate bad;
    bad.option = UpdateOption::add;
    bad.skill = make_functional("sloppy wrapper", "thin wrapper", "list_contacts()",
                                {"list_contacts"});
    updates.push_back(bad);
    return updates;
}

}  // namespace

TEST_CASE("refine: duplicates merge, bad skill filtered, one add emerges") {
    auto mock = refine_mocks();
    HashEmbeddingGateway embedder(128, 5);
    EmbeddingCache cache;
    const auto templates = load_templates();
    const auto schemas = load_schemas();
    RefineContext context{mock, embedder, cache, templates, schemas, {}, 1, nullptr};

    const auto result = refine(refine_candidates(), SkillLibrary{}, context, 1);
    REQUIRE(result.updates.size() == 1);
    CHECK(result.updates[0].option == UpdateOption::add);
    CHECK(result.updates[0].skill->name == "page walker");
    CHECK(result.report.candidates_in == 3);
    CHECK(result.report.clusters == 1);
    CHECK(result.report.filtered_general == 1);
    CHECK(result.report.updates_add == 1);
}

TEST_CASE("refine of nothing is nothing") {
    ScriptedChatGateway mock;
    HashEmbeddingGateway embedder(128, 5);
    EmbeddingCache cache;
    const auto templates = load_templates();
    const auto schemas = load_schemas();
    RefineContext context{mock, embedder, cache, templates, schemas, {}, 1, nullptr};
    const auto result = refine({}, SkillLibrary{}, context, 1);
    CHECK(result.updates.empty());
    CHECK(mock.call_count() == 0);
}

TEST_CASE("refine: static-check rejects never reach the llm schema filter") {
    ScriptedChatGateway mock;
    mock.add_contains_rule({"quality is good or bad"}, "good");
    mock.add_contains_rule({"tool-invocation expert"}, "<answer>correct</answer>");
    HashEmbeddingGateway embedder(128, 5);
    EmbeddingCache cache;
    const auto templates = load_templates();
    const auto schemas = load_schemas();
    RefineContext context{mock, embedder, cache, templates, schemas, {}, 1, nullptr};

    SkillUpdate ghost;
    ghost.option = UpdateOption::add;
    ghost.skill = make_functional("ghost", "d", "frobnicate(x=1)", {"frobnicate"});
    const auto result = refine({ghost}, SkillLibrary{}, context, 1);
    CHECK(result.updates.empty());
    CHECK(result.report.filtered_static == 1);
    CHECK(mock.call_count_containing("tool-invocation expert") == 0);
}

TEST_CASE("refine: identical re-extractions of a library skill become keeps") {
    ScriptedChatGateway mock;
    mock.add_contains_rule({"quality is good or bad"}, "good");
    mock.add_contains_rule({"tool-invocation expert"}, "<answer>correct</answer>");
    HashEmbeddingGateway embedder(128, 5);
    EmbeddingCache cache;
    const auto templates = load_templates();
    const auto schemas = load_schemas();
    RefineContext context{mock, embedder, cache, templates, schemas, {}, 1, nullptr};

    const Skill existing = make_functional("page walker", "walks pages", "list_files(page=1)",
                                           {"list_files"});
    SkillUpdate seed;
    seed.option = UpdateOption::add;
    seed.skill = existing;
    const SkillLibrary library = apply_update(SkillLibrary{}, seed);

    const auto result = refine({seed}, library, context, 1);
    CHECK(result.updates.empty());
    CHECK(result.report.updates_keep == 1);
}

TEST_CASE("refine is deterministic under mock gateways") {
    const auto templates = load_templates();
    const auto schemas = load_schemas();
    auto run = [&] {
        auto mock = refine_mocks();
        HashEmbeddingGateway embedder(128, 5);
        EmbeddingCache cache;
        RefineContext context{mock, embedder, cache, templates, schemas, {}, 1, nullptr};
        const auto result = refine(refine_candidates(), SkillLibrary{}, context, 1);
        json dump = json::array();
        for (const auto& u : result.updates)
            dump.push_back({{"option", to_string(u.option)}, {"name", u.skill->name},
                            {"document", u.skill->document}});
        return canonical_dump(dump);
    };
    CHECK(run() == run());
}
