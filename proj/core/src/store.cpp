#include "skillx/store.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "skillx/sha256.hpp"
#include "skillx/util.hpp"

namespace skillx {

using nlohmann::json;
namespace fs = std::filesystem;

std::string canonical_dump(const json& doc) {
    return doc.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write: " + path);
        out.write(bytes.data(), std::streamsize(bytes.size()));
        if (!out) throw IoError("short write: " + path);
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        std::remove(tmp.c_str());
        throw IoError("cannot rename into place: " + path + " (" + ec.message() + ")");
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

// --- skill library -------------------------------------------------------

namespace {

json skill_to_json(const Skill& skill) {
    json doc = {
        {"name", skill.name},
        {"document", skill.document},
        {"content", skill.content},
        {"tools", skill.tools},
        {"level", to_string(skill.level)},
        {"provenance",
         {{"source_task_id", skill.provenance.source_task_id},
          {"iteration_index", skill.provenance.iteration_index},
          {"origin", to_string(skill.provenance.origin)}}},
    };
    if (skill.level == SkillLevel::planning) doc["source_task_text"] = skill.source_task_text;
    return doc;
}

Skill skill_from_json(const json& doc) {
    Skill skill;
    try {
        skill.name = doc.at("name").get<std::string>();
        skill.document = doc.at("document").get<std::string>();
        skill.content = doc.at("content").get<std::string>();
        for (const auto& t : doc.value("tools", json::array()))
            skill.tools.push_back(t.get<std::string>());
        skill.level = skill_level_from_string(doc.at("level").get<std::string>());
        if (doc.contains("provenance")) {
            const json& p = doc["provenance"];
            skill.provenance.source_task_id = p.value("source_task_id", "");
            skill.provenance.iteration_index = p.value("iteration_index", 0);
            skill.provenance.origin = skill_origin_from_string(p.value("origin", "extracted"));
        }
        skill.source_task_text = doc.value("source_task_text", "");
    } catch (const json::exception& e) {
        throw FormatError("malformed skill record: " + std::string(e.what()));
    }
    return skill;
}

json update_log_to_json(const std::vector<UpdateLogEntry>& log) {
    json out = json::array();
    for (const auto& entry : log) {
        json record = {{"iteration", entry.iteration},
                       {"option", to_string(entry.option)},
                       {"name", entry.name}};
        if (!entry.modified_from.empty()) record["modified_from"] = entry.modified_from;
        out.push_back(std::move(record));
    }
    return out;
}

std::vector<UpdateLogEntry> update_log_from_json(const json& doc) {
    std::vector<UpdateLogEntry> log;
    for (const auto& record : doc) {
        UpdateLogEntry entry;
        entry.iteration = record.value("iteration", 0);
        const std::string option = record.value("option", "add");
        entry.option = option == "modify" ? UpdateOption::modify : UpdateOption::add;
        entry.name = record.value("name", "");
        entry.modified_from = record.value("modified_from", "");
        log.push_back(std::move(entry));
    }
    return log;
}

}  // namespace

json library_to_json(const SkillLibrary& library, bool embed_vectors,
                     const std::map<std::string, Vec>* vectors_by_name) {
    json by_level = {{"planning", json::array()},
                     {"functional", json::array()},
                     {"atomic", json::array()}};
    for (const auto& [name, skill] : library.skills()) {
        json record = skill_to_json(skill);
        if (embed_vectors && vectors_by_name != nullptr) {
            const auto it = vectors_by_name->find(name);
            if (it != vectors_by_name->end()) {
                json vec = json::array();
                for (float x : it->second) vec.push_back(double(x));
                record["vector"] = std::move(vec);
            }
        }
        by_level[to_string(skill.level)].push_back(std::move(record));
    }
    json doc = {{"version", kLibraryFormatVersion},
                {"revision", library.version()},
                {"iteration", library.iteration()},
                {"skills", std::move(by_level)},
                {"update_log", update_log_to_json(library.update_log())}};
    doc["digest"] = sha256_hex(canonical_dump(doc));
    return doc;
}

SkillLibrary library_from_json(const json& doc) {
    if (!doc.is_object()) throw FormatError("library file is not a JSON object");
    const int version = doc.value("version", -1);
    if (version != kLibraryFormatVersion)
        throw VersionError("unsupported library format version: " + std::to_string(version));

    std::vector<Skill> skills;
    const json levels = doc.value("skills", json::object());
    for (const char* level : {"planning", "functional", "atomic"}) {
        for (const auto& record : levels.value(level, json::array()))
            skills.push_back(skill_from_json(record));
    }
    for (const auto& skill : skills) {
        const auto report = validate_skill(skill);
        if (!report.ok())
            throw ValidationError("skill '" + skill.name +
                                  "' fails validation: " + join(report.violations, "; "));
    }
    return SkillLibrary::restore(doc.value("revision", 0), doc.value("iteration", 0),
                                 std::move(skills),
                                 update_log_from_json(doc.value("update_log", json::array())));
}

std::string library_digest(const SkillLibrary& library) {
    return library_to_json(library).at("digest").get<std::string>();
}

std::string save_library(const SkillLibrary& library, const std::string& path) {
    const json doc = library_to_json(library);
    write_file_atomic(path, canonical_dump(doc));
    return doc.at("digest").get<std::string>();
}

SkillLibrary load_library(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw FormatError("library file is not valid JSON: " + std::string(e.what()));
    }
    return library_from_json(doc);
}

// --- tool schemas ---------------------------------------------------------

ToolSchemaSet tool_schemas_from_json(const json& doc) {
    std::vector<ToolSchema> tools;
    try {
        for (const auto& record : doc.at("tools")) {
            ToolSchema tool;
            tool.name = record.at("name").get<std::string>();
            tool.description = record.value("description", "");
            tool.returns = record.value("returns", "");
            for (const auto& p : record.value("parameters", json::array())) {
                ParamSpec spec;
                spec.name = p.at("name").get<std::string>();
                spec.type = param_type_from_string(p.at("type").get<std::string>());
                spec.required = p.value("required", false);
                spec.description = p.value("description", "");
                tool.parameters.push_back(std::move(spec));
            }
            tools.push_back(std::move(tool));
        }
    } catch (const json::exception& e) {
        throw FormatError("malformed tool schema file: " + std::string(e.what()));
    }
    return ToolSchemaSet(std::move(tools));
}

json tool_schemas_to_json(const ToolSchemaSet& schemas) {
    json tools = json::array();
    for (const auto& [name, tool] : schemas.tools()) {
        json params = json::array();
        for (const auto& p : tool.parameters) {
            params.push_back({{"name", p.name},
                              {"type", to_string(p.type)},
                              {"required", p.required},
                              {"description", p.description}});
        }
        tools.push_back({{"name", tool.name},
                         {"description", tool.description},
                         {"parameters", std::move(params)},
                         {"returns", tool.returns}});
    }
    return json{{"tools", std::move(tools)}};
}

ToolSchemaSet load_tool_schemas(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw FormatError("tool schema file is not valid JSON: " + std::string(e.what()));
    }
    return tool_schemas_from_json(doc);
}

// --- trajectories ---------------------------------------------------------

std::string trajectories_to_jsonl(const std::vector<Trajectory>& trajectories) {
    std::string out;
    for (const auto& traj : trajectories) {
        const json header = {
            {"task_id", traj.task_id}, {"split", to_string(traj.split)}, {"text", traj.task_text}};
        out += header.dump() + "\n";
        for (const auto& step : traj.steps) {
            json action;
            if (!step.raw_code.empty())
                action = {{"code", step.raw_code}};
            else
                action = {{"tool", step.action.tool}, {"args", step.action.args}};
            const json line = {{"t", step.index},
                               {"thought", step.thought},
                               {"action", std::move(action)},
                               {"observation", step.observation},
                               {"outcome", to_string(step.outcome)}};
            out += line.dump() + "\n";
        }
        const json trailer = {{"success", traj.success}, {"steps", traj.steps.size()}};
        out += trailer.dump() + "\n";
    }
    return out;
}

std::vector<Trajectory> trajectories_from_jsonl(const std::string& bytes) {
    std::vector<Trajectory> out;
    Trajectory current;
    bool open = false;
    int rollout_counter = 0;
    for (const auto& line : split_lines(bytes)) {
        if (trim(line).empty()) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw FormatError("bad trajectory line: " + std::string(e.what()));
        }
        if (!open) {
            if (!doc.contains("task_id")) throw FormatError("expected trajectory header line");
            current = Trajectory{};
            current.task_id = doc.at("task_id").get<std::string>();
            current.split = task_split_from_string(doc.value("split", "train"));
            current.task_text = doc.value("text", "");
            current.rollout_index = ++rollout_counter;
            open = true;
        } else if (doc.contains("success")) {
            current.success = doc.at("success").get<bool>();
            if (doc.value("steps", current.steps.size()) != current.steps.size())
                throw FormatError("trajectory trailer step count mismatch");
            out.push_back(std::move(current));
            open = false;
        } else {
            TrajectoryStep step;
            step.index = doc.at("t").get<int>();
            step.thought = doc.value("thought", "");
            const json action = doc.value("action", json::object());
            if (action.contains("code")) {
                step.raw_code = action.at("code").get<std::string>();
            } else {
                step.action.tool = action.value("tool", "");
                step.action.args = action.value("args", json::object());
            }
            step.observation = doc.value("observation", "");
            step.outcome = tool_outcome_from_string(doc.value("outcome", "none"));
            current.steps.push_back(std::move(step));
        }
    }
    if (open) throw FormatError("trajectory block missing trailer");
    return out;
}

void save_trajectories(const std::vector<Trajectory>& trajectories, const std::string& path) {
    write_file_atomic(path, trajectories_to_jsonl(trajectories));
}

std::vector<Trajectory> load_trajectories(const std::string& path) {
    return trajectories_from_jsonl(read_file(path));
}

// --- tasks -----------------------------------------------------------------

std::vector<Task> load_tasks(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw FormatError("task file is not valid JSON: " + std::string(e.what()));
    }
    std::vector<Task> tasks;
    const json list = doc.is_array() ? doc : doc.value("tasks", json::array());
    for (const auto& record : list) {
        Task task;
        task.id = record.at("id").get<std::string>();
        task.text = record.at("text").get<std::string>();
        task.split = task_split_from_string(record.value("split", "train"));
        if (trim(task.text).empty()) throw FormatError("task '" + task.id + "' has empty text");
        tasks.push_back(std::move(task));
    }
    return tasks;
}

void save_tasks(const std::vector<Task>& tasks, const std::string& path) {
    json list = json::array();
    for (const auto& task : tasks)
        list.push_back(
            {{"id", task.id}, {"text", task.text}, {"split", to_string(task.split)}});
    write_file_atomic(path, canonical_dump(list));
}

// --- prompt templates -------------------------------------------------------

namespace {
// A slot is {lower_snake_case}; everything else (JSON braces, code samples)
// passes through untouched.
bool is_placeholder_key(std::string_view key) {
    if (key.empty()) return false;
    for (char c : key)
        if (!(std::islower(static_cast<unsigned char>(c)) ||
              std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
            return false;
    return true;
}
}  // namespace

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
    std::string out;
    out.reserve(text_.size());
    size_t pos = 0;
    while (pos < text_.size()) {
        const size_t open = text_.find('{', pos);
        if (open == std::string::npos) {
            out.append(text_, pos, std::string::npos);
            break;
        }
        out.append(text_, pos, open - pos);
        const size_t close = text_.find('}', open + 1);
        if (close == std::string::npos) {
            out.append(text_, open, std::string::npos);
            break;
        }
        const std::string key = text_.substr(open + 1, close - open - 1);
        if (!is_placeholder_key(key)) {
            out.push_back('{');
            pos = open + 1;
            continue;
        }
        const auto it = values.find(key);
        if (it == values.end())
            throw FormatError("template placeholder has no value: {" + key + "}");
        out.append(it->second);
        pos = close + 1;
    }
    return out;
}

const std::vector<std::string>& TemplateSet::required_names() {
    static const std::vector<std::string> names = {
        "plan_extract",    "functional_extract", "atomic_extract",  "merge",
        "general_filter",  "tool_schema_filter", "tool_summary",    "pseudo_plan_rewrite",
        "self_filter",     "task_synthesis"};
    return names;
}

TemplateSet TemplateSet::load_from(const std::string& dir) {
    TemplateSet set;
    for (const auto& name : required_names()) {
        const std::string path = (fs::path(dir) / (name + ".txt")).string();
        set.templates_.emplace(name, PromptTemplate(read_file(path)));
    }
    return set;
}

const PromptTemplate& TemplateSet::get(const std::string& name) const {
    const auto it = templates_.find(name);
    if (it == templates_.end()) throw FormatError("unknown prompt template: " + name);
    return it->second;
}

}  // namespace skillx
