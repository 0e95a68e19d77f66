#include "skillx/toy_env.hpp"

#include <algorithm>

#include "skillx/store.hpp"
#include "skillx/util.hpp"

namespace skillx {

using nlohmann::json;

namespace {

json page_of(const std::vector<json>& items, int page, int page_size) {
    json slice = json::array();
    const size_t begin = size_t((page - 1) * page_size);
    for (size_t i = begin; i < items.size() && i < begin + size_t(page_size); ++i)
        slice.push_back(items[i]);
    return slice;
}

int total_pages(size_t count, int page_size) {
    return count == 0 ? 1 : int((count + size_t(page_size) - 1) / size_t(page_size));
}

StepResult fail(const std::string& message) {
    return {json{{"error", message}}.dump(), ToolOutcome::failure};
}

StepResult ok(json payload) {
    return {payload.dump(), ToolOutcome::success};
}

}  // namespace

ToyWorld ToyWorld::from_fixture(const json& fixture, uint64_t seed) {
    ToyWorld world;
    world.seed_ = seed;
    world.page_size_ = fixture.value("page_size", 2);

    const json state = fixture.value("initial_state", json::object());
    for (const auto& u : state.value("users", json::array()))
        world.users_.push_back(u.get<std::string>());
    for (const auto& c : state.value("contacts", json::array()))
        world.contacts_.push_back(c.get<std::string>());
    for (const auto& f : state.value("files", json::array())) world.files_.push_back(f);
    for (const auto& s : state.value("songs", json::array())) world.songs_.push_back(s);
    for (const auto& p : state.value("playlists", json::array())) {
        std::vector<std::string> songs;
        for (const auto& id : p.value("songs", json::array()))
            songs.push_back(id.get<std::string>());
        world.playlists_[p.at("name").get<std::string>()] = std::move(songs);
    }
    for (const auto& [city, report] : state.value("weather", json::object()).items())
        world.weather_[city] = report.get<std::string>();

    auto parse_predicates = [](const json& list) {
        std::vector<Predicate> predicates;
        for (const auto& p : list)
            predicates.push_back({p.at("kind").get<std::string>(), p});
        return predicates;
    };
    for (const auto& task : fixture.value("tasks", json::array())) {
        const auto predicates = parse_predicates(task.value("evaluator", json::array()));
        if (predicates.empty())
            throw FormatError("fixture task '" + task.value("id", std::string("?")) +
                              "' has no evaluator predicates");
        world.evaluators_by_task_[task.at("id").get<std::string>()] = predicates;
    }
    for (const auto& entry : fixture.value("synthesized_evaluators", json::array())) {
        world.synthesized_evaluators_.emplace_back(
            normalized_text_key(entry.at("text_contains").get<std::string>()),
            parse_predicates(entry.at("evaluator")));
    }
    return world;
}

void ToyWorld::register_task(const Task& task) {
    if (evaluators_by_task_.count(task.id)) return;
    const std::string key = normalized_text_key(task.text);
    for (const auto& [pattern, predicates] : synthesized_evaluators_) {
        if (contains(key, pattern)) {
            evaluators_by_task_[task.id] = predicates;
            return;
        }
    }
    // no anticipated success condition: leave unregistered
}

std::optional<std::string> ToyWorld::check_args(
    const std::string& tool, const json& args,
    const std::vector<std::pair<std::string, char>>& spec) const {
    if (!args.is_object()) return "arguments must be an object";
    for (const auto& [name, type] : spec) {
        if (!args.contains(name)) return "missing required parameter '" + name + "'";
        const json& v = args.at(name);
        if (type == 's' && !v.is_string())
            return "parameter '" + name + "' must be a string";
        if (type == 'i' && !v.is_number_integer())
            return "parameter '" + name + "' must be an integer";
    }
    for (const auto& [key, value] : args.items()) {
        const bool known = std::any_of(spec.begin(), spec.end(),
                                       [&](const auto& p) { return p.first == key; });
        if (!known) return "unknown parameter '" + key + "' for tool '" + tool + "'";
    }
    return std::nullopt;
}

StepResult ToyWorld::step(const ToolCall& call) {
    static const std::vector<std::string> known = {
        "login",          "list_contacts", "list_playlists",       "get_playlist",
        "create_playlist", "add_song_to_playlist", "search_songs", "list_files",
        "read_file",      "send_message",  "send_email",           "get_weather",
        "create_reminder"};
    if (std::find(known.begin(), known.end(), call.tool) == known.end())
        throw UnknownTool("tool is not declared in this environment: " + call.tool);
    return run_tool(call.tool, call.args);
}

StepResult ToyWorld::run_tool(const std::string& tool, const json& args) {
    if (tool == "login") {
        if (auto err = check_args(tool, args, {{"username", 's'}})) return fail(*err);
        const std::string username = args.at("username").get<std::string>();
        if (std::find(users_.begin(), users_.end(), username) == users_.end())
            return fail("unknown user '" + username + "'");
        logged_in_ = true;
        current_user_ = username;
        return ok({{"logged_in", username}});
    }
    if (tool == "list_contacts") {
        if (auto err = check_args(tool, args, {})) return fail(*err);
        return ok({{"contacts", contacts_}});
    }
    if (tool == "list_playlists") {
        if (auto err = check_args(tool, args, {{"page", 'i'}})) return fail(*err);
        const int page = args.at("page").get<int>();
        std::vector<json> items;
        for (const auto& [name, songs] : playlists_)
            items.push_back({{"name", name}, {"songs", songs.size()}});
        const int pages = total_pages(items.size(), page_size_);
        if (page < 1 || page > pages)
            return fail("page " + std::to_string(page) + " out of range (" +
                        std::to_string(pages) + " pages)");
        return ok({{"page", page},
                   {"total_pages", pages},
                   {"total_playlists", items.size()},
                   {"playlists", page_of(items, page, page_size_)}});
    }
    if (tool == "get_playlist") {
        if (auto err = check_args(tool, args, {{"name", 's'}})) return fail(*err);
        const std::string name = args.at("name").get<std::string>();
        const auto it = playlists_.find(name);
        if (it == playlists_.end()) return fail("playlist '" + name + "' not found");
        json songs = json::array();
        for (const auto& id : it->second) {
            for (const auto& s : songs_)
                if (s.at("id") == id) songs.push_back(s);
        }
        return ok({{"name", name}, {"songs", songs}});
    }
    if (tool == "create_playlist") {
        if (auto err = check_args(tool, args, {{"name", 's'}})) return fail(*err);
        const std::string name = args.at("name").get<std::string>();
        if (playlists_.count(name)) return fail("playlist '" + name + "' already exists");
        playlists_[name] = {};
        return ok({{"created", name}});
    }
    if (tool == "add_song_to_playlist") {
        if (auto err = check_args(tool, args, {{"playlist", 's'}, {"song_id", 's'}}))
            return fail(*err);
        const std::string name = args.at("playlist").get<std::string>();
        const std::string song_id = args.at("song_id").get<std::string>();
        const auto it = playlists_.find(name);
        if (it == playlists_.end())
            return fail("playlist '" + name + "' does not exist; create it first");
        const bool song_known = std::any_of(songs_.begin(), songs_.end(),
                                            [&](const json& s) { return s.at("id") == song_id; });
        if (!song_known) return fail("song '" + song_id + "' not found");
        it->second.push_back(song_id);
        return ok({{"playlist", name}, {"added", song_id}});
    }
    if (tool == "search_songs") {
        if (auto err = check_args(tool, args, {{"query", 's'}, {"page", 'i'}})) return fail(*err);
        const std::string query = to_lower(args.at("query").get<std::string>());
        const int page = args.at("page").get<int>();
        std::vector<json> hits;
        for (const auto& s : songs_) {
            const std::string title = to_lower(s.at("title").get<std::string>());
            const std::string genre = to_lower(s.value("genre", ""));
            if (contains(title, query) || contains(genre, query)) hits.push_back(s);
        }
        const int pages = total_pages(hits.size(), page_size_);
        if (page < 1 || page > pages)
            return fail("page " + std::to_string(page) + " out of range (" +
                        std::to_string(pages) + " pages)");
        return ok({{"page", page},
                   {"total_pages", pages},
                   {"total_matches", hits.size()},
                   {"songs", page_of(hits, page, page_size_)}});
    }
    if (tool == "list_files") {
        if (auto err = check_args(tool, args, {{"page", 'i'}})) return fail(*err);
        const int page = args.at("page").get<int>();
        std::vector<json> items;
        for (const auto& f : files_)
            items.push_back({{"id", f.at("id")}, {"name", f.at("name")}, {"size", f.at("size")}});
        const int pages = total_pages(items.size(), page_size_);
        if (page < 1 || page > pages)
            return fail("page " + std::to_string(page) + " out of range (" +
                        std::to_string(pages) + " pages)");
        return ok({{"page", page},
                   {"total_pages", pages},
                   {"total_files", items.size()},
                   {"files", page_of(items, page, page_size_)}});
    }
    if (tool == "read_file") {
        if (auto err = check_args(tool, args, {{"file_id", 's'}})) return fail(*err);
        const std::string id = args.at("file_id").get<std::string>();
        for (const auto& f : files_) {
            if (f.at("id") == id)
                return ok({{"id", id}, {"name", f.at("name")}, {"content", f.at("content")}});
        }
        return fail("file '" + id + "' not found");
    }
    if (tool == "send_message") {
        if (auto err = check_args(tool, args, {{"to", 's'}, {"text", 's'}})) return fail(*err);
        const std::string to = args.at("to").get<std::string>();
        if (std::find(contacts_.begin(), contacts_.end(), to) == contacts_.end())
            return fail("'" + to + "' is not in your contacts");
        messages_sent_.push_back({{"to", to}, {"text", args.at("text")}});
        return ok({{"sent_to", to}});
    }
    if (tool == "send_email") {
        if (auto err = check_args(tool, args, {{"to", 's'}, {"subject", 's'}, {"body", 's'}}))
            return fail(*err);
        if (!logged_in_) return fail("not logged in; call login first");
        emails_sent_.push_back(
            {{"to", args.at("to")}, {"subject", args.at("subject")}, {"body", args.at("body")}});
        return ok({{"email_sent_to", args.at("to")}});
    }
    if (tool == "get_weather") {
        if (auto err = check_args(tool, args, {{"city", 's'}})) return fail(*err);
        const std::string city = args.at("city").get<std::string>();
        weather_queries_.push_back(city);
        const auto it = weather_.find(city);
        const std::string report = it == weather_.end() ? "mild, 18C, light wind" : it->second;
        return ok({{"city", city}, {"report", report}});
    }
    if (tool == "create_reminder") {
        if (auto err = check_args(tool, args, {{"text", 's'}, {"time", 's'}})) return fail(*err);
        reminders_.push_back({{"text", args.at("text")}, {"time", args.at("time")}});
        return ok({{"reminder", args.at("text")}, {"time", args.at("time")}});
    }
    throw UnknownTool("tool is not declared in this environment: " + tool);
}

bool ToyWorld::predicate_holds(const Predicate& predicate) const {
    const json& p = predicate.params;
    if (predicate.kind == "playlist_exists") {
        return playlists_.count(p.at("name").get<std::string>()) > 0;
    }
    if (predicate.kind == "playlist_contains") {
        const auto it = playlists_.find(p.at("playlist").get<std::string>());
        if (it == playlists_.end()) return false;
        const std::string title = p.at("song_title").get<std::string>();
        for (const auto& id : it->second) {
            for (const auto& s : songs_)
                if (s.at("id") == id && s.at("title") == title) return true;
        }
        return false;
    }
    if (predicate.kind == "email_sent") {
        for (const auto& e : emails_sent_) {
            if (e.at("to") != p.at("to")) continue;
            if (p.contains("subject_contains") &&
                !contains(e.at("subject").get<std::string>(),
                          p.at("subject_contains").get<std::string>()))
                continue;
            if (p.contains("body_contains") &&
                !contains(e.at("body").get<std::string>(), p.at("body_contains").get<std::string>()))
                continue;
            return true;
        }
        return false;
    }
    if (predicate.kind == "message_sent") {
        for (const auto& m : messages_sent_) {
            if (m.at("to") != p.at("to")) continue;
            if (p.contains("text_contains") &&
                !contains(m.at("text").get<std::string>(), p.at("text_contains").get<std::string>()))
                continue;
            return true;
        }
        return false;
    }
    if (predicate.kind == "reminder_exists") {
        for (const auto& r : reminders_) {
            if (p.contains("text_contains") &&
                !contains(r.at("text").get<std::string>(), p.at("text_contains").get<std::string>()))
                continue;
            return true;
        }
        return false;
    }
    if (predicate.kind == "weather_checked") {
        if (!p.contains("city")) return !weather_queries_.empty();
        return std::find(weather_queries_.begin(), weather_queries_.end(),
                         p.at("city").get<std::string>()) != weather_queries_.end();
    }
    throw FormatError("unknown evaluator predicate kind: " + predicate.kind);
}

int ToyWorld::evaluate(const std::string& task_id) const {
    const auto it = evaluators_by_task_.find(task_id);
    if (it == evaluators_by_task_.end())
        throw UnknownTask("no evaluator registered for task: " + task_id);
    for (const auto& predicate : it->second)
        if (!predicate_holds(predicate)) return 0;
    return 1;
}

namespace {

class ToyEpisodeSession : public EpisodeSession {
public:
    ToyEpisodeSession(ToyWorld world, Task task) : world_(std::move(world)), task_(std::move(task)) {
        world_.register_task(task_);
    }

    StepResult step(const ToolCall& call) override { return world_.step(call); }

    int evaluate() const override {
        // An unanticipated synthesized task has no success condition.
        if (!world_.has_evaluator(task_.id)) return 0;
        return world_.evaluate(task_.id);
    }

private:
    ToyWorld world_;
    Task task_;
};

}  // namespace

ToyEnvironment::ToyEnvironment(json fixture, ToolSchemaSet schemas, uint64_t seed)
    : fixture_(std::move(fixture)),
      schemas_(std::move(schemas)),
      seed_(seed),
      prototype_(ToyWorld::from_fixture(fixture_, seed)) {}

ToyEnvironment ToyEnvironment::from_files(const std::string& fixture_path,
                                          const std::string& schemas_path, uint64_t seed) {
    json fixture;
    try {
        fixture = json::parse(read_file(fixture_path));
    } catch (const json::exception& e) {
        throw FormatError("fixture is not valid JSON: " + std::string(e.what()));
    }
    return ToyEnvironment(std::move(fixture), load_tool_schemas(schemas_path), seed);
}

std::unique_ptr<EpisodeSession> ToyEnvironment::begin(const Task& task) {
    return std::make_unique<ToyEpisodeSession>(prototype_, task);
}

ScriptedPolicy::ScriptedPolicy(const json& policies) {
    for (const auto& [task_id, scripts] : policies.value("tasks", json::object()).items()) {
        TaskScripts entry;
        entry.naive = parse_script(scripts.value("naive", json::array()));
        entry.direct = parse_script(scripts.value("direct", json::array()));
        for (const auto& tool : scripts.value("direct_requires", json::array()))
            entry.direct_requires.push_back(tool.get<std::string>());
        by_task_[task_id] = std::move(entry);
    }
    for (const auto& entry : policies.value("synthesized", json::array())) {
        synthesized_.emplace_back(normalized_text_key(entry.at("text_contains").get<std::string>()),
                                  parse_script(entry.at("script")));
    }
    for (const auto& [tool, args] : policies.value("probe_args", json::object()).items())
        probe_args_[tool] = args;
}

ScriptedPolicy ScriptedPolicy::from_fixture(const json& fixture) {
    return ScriptedPolicy(fixture.value("policies", json::object()));
}

std::vector<Action> ScriptedPolicy::parse_script(const json& steps) {
    std::vector<Action> script;
    for (const auto& step : steps) {
        Action action;
        action.thought = step.value("thought", "");
        action.call.tool = step.at("tool").get<std::string>();
        action.call.args = step.value("args", json::object());
        script.push_back(std::move(action));
    }
    return script;
}

Action ScriptedPolicy::decide(const PolicyContext& context) {
    if (!context.exploration_targets.empty()) {
        const size_t i = size_t(context.step_index);
        if (i >= context.exploration_targets.size()) return Action{.finish = true};
        const std::string& tool = context.exploration_targets[i];
        Action action;
        action.thought = "explore tool " + tool;
        action.call.tool = tool;
        const auto it = probe_args_.find(tool);
        action.call.args = it == probe_args_.end() ? json::object() : it->second;
        return action;
    }

    const std::vector<Action>* script = nullptr;
    const auto it = context.task ? by_task_.find(context.task->id) : by_task_.end();
    if (it != by_task_.end()) {
        const TaskScripts& scripts = it->second;
        bool use_direct = !scripts.direct.empty() && !context.skill_prompt.empty();
        for (const auto& tool : scripts.direct_requires) {
            if (!contains(context.skill_prompt, tool)) {
                use_direct = false;
                break;
            }
        }
        script = use_direct ? &scripts.direct : &scripts.naive;
    } else if (context.task) {
        const std::string key = normalized_text_key(context.task->text);
        for (const auto& [pattern, candidate] : synthesized_) {
            if (contains(key, pattern)) {
                script = &candidate;
                break;
            }
        }
    }
    if (script == nullptr || size_t(context.step_index) >= script->size())
        return Action{.finish = true};
    return (*script)[size_t(context.step_index)];
}

}  // namespace skillx
