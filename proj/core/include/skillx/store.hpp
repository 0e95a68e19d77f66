#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "skillx/skill.hpp"
#include "skillx/tool_schema.hpp"
#include "skillx/trajectory.hpp"
#include "skillx/util.hpp"

namespace skillx {

/// Canonical serialization: UTF-8, keys sorted (nlohmann's object order),
/// two-space indent, newline-terminated. Identical logical content yields
/// identical bytes on every platform, so artifact diffs and digests mean
/// something.
std::string canonical_dump(const nlohmann::json& doc);

/// Whole-file atomic write (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& bytes);

std::string read_file(const std::string& path);

// --- skill library -------------------------------------------------------

inline constexpr int kLibraryFormatVersion = 1;

nlohmann::json library_to_json(const SkillLibrary& library, bool embed_vectors = false,
                               const std::map<std::string, Vec>* vectors_by_name = nullptr);
SkillLibrary library_from_json(const nlohmann::json& doc);

/// Canonical save; returns the content digest (also stored in the file).
std::string save_library(const SkillLibrary& library, const std::string& path);

/// Loads and structurally validates; rejects unknown format versions and
/// any skill that fails validate_skill.
SkillLibrary load_library(const std::string& path);

/// Digest a library would be saved under, without touching the disk.
std::string library_digest(const SkillLibrary& library);

// --- tool schemas ---------------------------------------------------------

ToolSchemaSet load_tool_schemas(const std::string& path);
ToolSchemaSet tool_schemas_from_json(const nlohmann::json& doc);
nlohmann::json tool_schemas_to_json(const ToolSchemaSet& schemas);

// --- trajectories ---------------------------------------------------------

/// Line-delimited JSON, one file per task: header {task_id, split, text},
/// one line per step {t, thought, action:{tool,args}|{code}, observation,
/// outcome}, trailer {success, steps}. Several rollouts of the same task
/// append further header/steps/trailer blocks.
std::string trajectories_to_jsonl(const std::vector<Trajectory>& trajectories);
std::vector<Trajectory> trajectories_from_jsonl(const std::string& bytes);

void save_trajectories(const std::vector<Trajectory>& trajectories, const std::string& path);
std::vector<Trajectory> load_trajectories(const std::string& path);

// --- tasks -----------------------------------------------------------------

std::vector<Task> load_tasks(const std::string& path);
void save_tasks(const std::vector<Task>& tasks, const std::string& path);

// --- prompt templates -------------------------------------------------------

/// A plain-text template with {placeholder} slots. Rendering replaces every
/// placeholder from the map; a slot with no value is an error (it means the
/// call site and the template drifted apart).
class PromptTemplate {
public:
    PromptTemplate() = default;
    explicit PromptTemplate(std::string text) : text_(std::move(text)) {}

    std::string render(const std::map<std::string, std::string>& values) const;
    const std::string& text() const { return text_; }

private:
    std::string text_;
};

/// Loads "<name>.txt" for each required pipeline prompt from a directory.
class TemplateSet {
public:
    static TemplateSet load_from(const std::string& dir);

    const PromptTemplate& get(const std::string& name) const;

    static const std::vector<std::string>& required_names();

private:
    std::map<std::string, PromptTemplate> templates_;
};

}  // namespace skillx
