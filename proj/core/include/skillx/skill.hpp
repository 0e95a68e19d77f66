#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skillx/errors.hpp"

namespace skillx {

enum class SkillLevel { planning, functional, atomic };

std::string to_string(SkillLevel level);
SkillLevel skill_level_from_string(const std::string& tag);

enum class SkillOrigin { extracted, merged, expanded };

std::string to_string(SkillOrigin origin);
SkillOrigin skill_origin_from_string(const std::string& tag);

struct Provenance {
    std::string source_task_id;
    int iteration_index = 0;
    SkillOrigin origin = SkillOrigin::extracted;

    bool operator==(const Provenance&) const = default;
};

/// One knowledge unit. `document` describes what the skill does and its
/// key parameters; `content` is the tool-invocation pattern (for planning
/// skills, the ordered step list). Planning skills carry the task text
/// they were distilled from, which doubles as their retrieval key.
struct Skill {
    std::string name;
    std::string document;
    std::string content;
    std::vector<std::string> tools;
    SkillLevel level = SkillLevel::functional;
    Provenance provenance;
    std::string source_task_text;  // planning level only

    bool operator==(const Skill&) const = default;
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Structural validation: non-empty name/document/content, single primary
/// tool in an atomic skill's name slot, at least one step in a planning
/// skill's content. Total function; never throws.
ValidationReport validate_skill(const Skill& skill);

/// Lines of a planning skill's content that parse as "# step N: ...".
std::vector<std::string> planning_step_lines(const std::string& content);

enum class UpdateOption { add, modify, keep };

std::string to_string(UpdateOption option);

struct SkillUpdate {
    UpdateOption option = UpdateOption::keep;
    std::optional<Skill> skill;  // add, modify
    std::string modified_from;   // modify only
    std::string kept_name;       // keep only
};

struct UpdateLogEntry {
    int iteration = 0;
    UpdateOption option = UpdateOption::add;
    std::string name;
    std::string modified_from;

    bool operator==(const UpdateLogEntry&) const = default;
};

/// Versioned, name-keyed skill collection. Value semantics: updates
/// produce new libraries, snapshots are safe to share across threads.
/// There is no delete operation anywhere in the algebra.
class SkillLibrary {
public:
    SkillLibrary() = default;

    int version() const { return version_; }
    int iteration() const { return iteration_; }
    size_t size() const { return skills_.size(); }
    bool empty() const { return skills_.empty(); }

    bool contains(const std::string& name) const { return skills_.count(name) > 0; }
    const Skill* find(const std::string& name) const;

    /// Name-ordered view of all skills.
    const std::map<std::string, Skill>& skills() const { return skills_; }
    std::vector<Skill> skills_at(SkillLevel level) const;

    const std::vector<UpdateLogEntry>& update_log() const { return update_log_; }

    SkillLibrary with_iteration(int iteration) const;

    // Internal constructors for the persistence layer.
    static SkillLibrary restore(int version, int iteration, std::vector<Skill> skills,
                                std::vector<UpdateLogEntry> update_log);

private:
    friend SkillLibrary apply_update(const SkillLibrary&, const SkillUpdate&);

    int version_ = 0;
    int iteration_ = 0;
    std::map<std::string, Skill> skills_;
    std::vector<UpdateLogEntry> update_log_;
};

/// The add/modify/keep algebra. `keep` is a strict no-op (nothing logged,
/// identical serialization); add and modify bump the version and append to
/// the update log with the library's current iteration.
SkillLibrary apply_update(const SkillLibrary& library, const SkillUpdate& update);

struct LibraryDiff {
    std::vector<std::string> added;
    std::vector<std::string> modified;  // same name, different document/content/tools
    std::vector<std::string> removed;
};

LibraryDiff library_diff(const SkillLibrary& a, const SkillLibrary& b);

}  // namespace skillx
