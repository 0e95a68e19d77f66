#include <doctest.h>

#include <filesystem>

#include "skillx/sha256.hpp"
#include "skillx/store.hpp"
#include "skillx/util.hpp"

using namespace skillx;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const auto dir = fs::temp_directory_path() / "skillx-store-tests";
    fs::create_directories(dir);
    return dir;
}

Skill functional_skill(const std::string& name, const std::string& doc = "does a thing") {
    Skill s;
    s.name = name;
    s.document = doc;
    s.content = name + "(x=1)";
    s.tools = {name};
    s.level = SkillLevel::functional;
    return s;
}

}  // namespace

TEST_CASE("sha256 matches known vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    // multi-block input
    const std::string long_input(1000, 'a');
    CHECK(sha256_hex(long_input) ==
          "41edece42d63e8d9bf515a9ba6932e1c20cbc9f5a5d134645adb5db1b9737ea3");
    CHECK(sha256_fingerprint("abc") == "ba7816bf8f01cfea");
}

TEST_CASE("canonical dump is key-sorted and newline terminated") {
    nlohmann::json doc;
    doc["zebra"] = 1;
    doc["alpha"] = 2;
    const std::string bytes = canonical_dump(doc);
    CHECK(bytes.back() == '\n');
    CHECK(bytes.find("alpha") < bytes.find("zebra"));
}

TEST_CASE("library round trip: save twice gives identical bytes and digest") {
    SkillLibrary lib;
    SkillUpdate add;
    add.option = UpdateOption::add;
    add.skill = functional_skill("spotify_get_all_playlists");
    lib = apply_update(lib, add);

    const auto path = (temp_dir() / "lib.json").string();
    const std::string d1 = save_library(lib, path);
    const std::string bytes1 = read_file(path);
    const std::string d2 = save_library(lib, path);
    const std::string bytes2 = read_file(path);
    CHECK(d1 == d2);
    CHECK(bytes1 == bytes2);

    const SkillLibrary loaded = load_library(path);
    CHECK(loaded.size() == lib.size());
    CHECK(loaded.version() == lib.version());
    CHECK(loaded.iteration() == lib.iteration());
    CHECK(*loaded.find("spotify_get_all_playlists") == *lib.find("spotify_get_all_playlists"));

    // save(load(bytes)) == bytes for canonical files
    save_library(loaded, path + ".roundtrip");
    CHECK(read_file(path + ".roundtrip") == bytes1);
}

TEST_CASE("empty library file is valid, zero skills") {
    const auto path = (temp_dir() / "empty.json").string();
    save_library(SkillLibrary{}, path);
    CHECK(load_library(path).size() == 0);
}

TEST_CASE("load_library rejects unknown versions and duplicate names") {
    const auto path = (temp_dir() / "bad.json").string();

    nlohmann::json doc = library_to_json(SkillLibrary{});
    doc["version"] = 99;
    write_file_atomic(path, canonical_dump(doc));
    CHECK_THROWS_AS(load_library(path), VersionError);

    nlohmann::json dup = library_to_json(SkillLibrary{});
    nlohmann::json record = {{"name", "x"},
                             {"document", "d"},
                             {"content", "x(a=1)"},
                             {"tools", {"x"}},
                             {"level", "functional"}};
    dup["skills"]["functional"] = {record, record};
    write_file_atomic(path, canonical_dump(dup));
    CHECK_THROWS_AS(load_library(path), ValidationError);

    write_file_atomic(path, "not json at all");
    CHECK_THROWS_AS(load_library(path), FormatError);
}

TEST_CASE("save_library to unwritable path raises IoError") {
    CHECK_THROWS_AS(save_library(SkillLibrary{}, "/proc/definitely/not/writable/lib.json"),
                    IoError);
}

TEST_CASE("tool schema loading enforces uniqueness and known types") {
    const auto path = (temp_dir() / "schemas.json").string();
    nlohmann::json doc = {{"tools",
                           {{{"name", "a"},
                             {"description", "tool a"},
                             {"parameters",
                              {{{"name", "x"}, {"type", "integer"}, {"required", true}}}},
                             {"returns", "r"}},
                            {{"name", "b"}, {"description", "tool b"}, {"parameters", nlohmann::json::array()}}}}};
    write_file_atomic(path, canonical_dump(doc));
    const auto schemas = load_tool_schemas(path);
    CHECK(schemas.size() == 2);
    CHECK(schemas.contains("a"));
    CHECK(schemas.find("a")->find_param("x")->type == ParamType::integer_t);

    doc["tools"].push_back({{"name", "a"}, {"description", "dup"}});
    write_file_atomic(path, canonical_dump(doc));
    CHECK_THROWS_AS(load_tool_schemas(path), DuplicateTool);

    doc["tools"] = {{{"name", "c"},
                     {"parameters", {{{"name", "x"}, {"type", "quaternion"}, {"required", false}}}}}};
    write_file_atomic(path, canonical_dump(doc));
    CHECK_THROWS_AS(load_tool_schemas(path), FormatError);
}

TEST_CASE("trajectory jsonl round trip") {
    Trajectory traj;
    traj.task_id = "t1";
    traj.split = TaskSplit::train;
    traj.task_text = "do the thing";
    TrajectoryStep step;
    step.index = 1;
    step.thought = "try it";
    step.action = {"list_files", {{"page", 1}}};
    step.observation = "{\"files\":[]}";
    step.outcome = ToolOutcome::success;
    traj.steps.push_back(step);
    traj.success = true;

    Trajectory code_traj = traj;
    code_traj.steps[0].action = {};
    code_traj.steps[0].raw_code = "print(1)";
    code_traj.rollout_index = 2;

    const std::string bytes = trajectories_to_jsonl({traj, code_traj});
    const auto loaded = trajectories_from_jsonl(bytes);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0] == traj);
    CHECK(loaded[1] == code_traj);
    // stability: serializing again yields the same bytes
    CHECK(trajectories_to_jsonl(loaded) == bytes);
}

TEST_CASE("trajectory jsonl rejects missing trailer") {
    const std::string bytes = R"({"task_id":"t","split":"train","text":"x"})" "\n";
    CHECK_THROWS_AS(trajectories_from_jsonl(bytes), FormatError);
}

TEST_CASE("prompt template rendering") {
    const PromptTemplate tpl("Task: {task}\nJSON looks like {\"k\": 1} and stays.");
    const std::string out = tpl.render({{"task", "clean the data"}});
    CHECK(contains(out, "Task: clean the data"));
    CHECK(contains(out, "{\"k\": 1}"));

    CHECK_THROWS_AS(PromptTemplate("{missing_value}").render({}), FormatError);
}
