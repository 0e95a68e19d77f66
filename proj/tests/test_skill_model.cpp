#include <doctest.h>

#include "skillx/skill.hpp"
#include "skillx/store.hpp"
#include "skillx/util.hpp"

using namespace skillx;

namespace {

Skill functional_skill(const std::string& name) {
    Skill s;
    s.name = name;
    s.document = "fetches things";
    s.content = name + "(page=1)";
    s.tools = {name};
    s.level = SkillLevel::functional;
    return s;
}

Skill atomic_skill(const std::string& tool) {
    Skill s;
    s.name = tool;
    s.document = "extended notes for " + tool;
    s.content = tool + "(x='a')";
    s.tools = {tool};
    s.level = SkillLevel::atomic;
    return s;
}

Skill planning_skill(const std::string& task_id, const std::string& task_text) {
    Skill s;
    s.name = "plan: " + task_id;
    s.document = "plan for " + task_text;
    s.content = "# step 1: find the data; apis: list_files\n# step 2: send it; apis: send_email";
    s.tools = {"list_files", "send_email"};
    s.level = SkillLevel::planning;
    s.source_task_text = task_text;
    return s;
}

SkillUpdate add_of(Skill s) {
    SkillUpdate u;
    u.option = UpdateOption::add;
    u.skill = std::move(s);
    return u;
}

}  // namespace

TEST_CASE("validate_skill: well-formed skills pass") {
    CHECK(validate_skill(functional_skill("spotify_get_songs")).ok());
    CHECK(validate_skill(atomic_skill("send_email")).ok());
    CHECK(validate_skill(planning_skill("t1", "email the report")).ok());
}

TEST_CASE("validate_skill: named violations") {
    Skill s = functional_skill("x");
    s.document = "";
    auto report = validate_skill(s);
    REQUIRE_FALSE(report.ok());
    CHECK(contains(report.violations.front(), "document empty"));

    Skill two_tools = atomic_skill("send_email");
    two_tools.name = "send_email,list_files";
    CHECK_FALSE(validate_skill(two_tools).ok());

    Skill planless = planning_skill("t1", "email the report");
    planless.content = "just prose, no steps";
    CHECK_FALSE(validate_skill(planless).ok());

    Skill keyless = planning_skill("t1", "email the report");
    keyless.source_task_text = "";
    CHECK_FALSE(validate_skill(keyless).ok());
}

TEST_CASE("apply_update: add grows the library by one") {
    SkillLibrary lib;
    lib = apply_update(lib, add_of(functional_skill("spotify_get_all_playlists")));
    CHECK(lib.size() == 1);
    CHECK(lib.version() == 1);
    REQUIRE(lib.update_log().size() == 1);
    CHECK(lib.update_log().front().option == UpdateOption::add);

    CHECK_THROWS_AS(apply_update(lib, add_of(functional_skill("spotify_get_all_playlists"))),
                    DuplicateName);
}

TEST_CASE("apply_update: keep is a byte-level no-op and logs nothing") {
    SkillLibrary lib;
    lib = apply_update(lib, add_of(functional_skill("a")));
    SkillUpdate keep;
    keep.option = UpdateOption::keep;
    keep.kept_name = "a";
    const SkillLibrary after = apply_update(lib, keep);
    CHECK(canonical_dump(library_to_json(after)) == canonical_dump(library_to_json(lib)));
    CHECK(after.update_log().size() == lib.update_log().size());
}

TEST_CASE("apply_update: modify replaces, renames, and errors") {
    SkillLibrary lib;
    lib = apply_update(lib, add_of(functional_skill("a")));
    lib = apply_update(lib, add_of(functional_skill("b")));

    Skill improved = functional_skill("a");
    improved.document = "better description";
    SkillUpdate modify;
    modify.option = UpdateOption::modify;
    modify.skill = improved;
    modify.modified_from = "a";
    const SkillLibrary after = apply_update(lib, modify);
    CHECK(after.size() == 2);
    CHECK(after.find("a")->document == "better description");

    SkillUpdate rename = modify;
    rename.skill->name = "c";
    const SkillLibrary renamed = apply_update(lib, rename);
    CHECK(renamed.size() == 2);
    CHECK(renamed.contains("c"));
    CHECK_FALSE(renamed.contains("a"));

    SkillUpdate unknown = modify;
    unknown.modified_from = "missing";
    CHECK_THROWS_AS(apply_update(lib, unknown), UnknownTarget);

    SkillUpdate collide = modify;
    collide.skill->name = "b";  // rename onto an existing different skill
    CHECK_THROWS_AS(apply_update(lib, collide), NameCollision);
}

TEST_CASE("add-only sequences grow monotonically; no delete exists") {
    SkillLibrary lib;
    for (int i = 0; i < 20; ++i) {
        lib = apply_update(lib, add_of(functional_skill("skill_" + std::to_string(i))));
        CHECK(lib.size() == size_t(i + 1));
    }
    // every skill in a library built through updates validates
    for (const auto& [name, skill] : lib.skills()) CHECK(validate_skill(skill).ok());
}

TEST_CASE("library_diff") {
    SkillLibrary a;
    a = apply_update(a, add_of(functional_skill("x")));

    const auto same = library_diff(a, a);
    CHECK(same.added.empty());
    CHECK(same.modified.empty());
    CHECK(same.removed.empty());

    SkillLibrary b = apply_update(a, add_of(functional_skill("y")));
    const auto grown = library_diff(a, b);
    CHECK(grown.added == std::vector<std::string>{"y"});
    CHECK(grown.modified.empty());

    Skill edited = functional_skill("x");
    edited.document = "edited";
    SkillUpdate modify;
    modify.option = UpdateOption::modify;
    modify.skill = edited;
    modify.modified_from = "x";
    const auto changed = library_diff(a, apply_update(a, modify));
    CHECK(changed.modified == std::vector<std::string>{"x"});
}
