#include "skillx/skill.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "skillx/util.hpp"

namespace skillx {

std::string to_string(SkillLevel level) {
    switch (level) {
        case SkillLevel::planning: return "planning";
        case SkillLevel::functional: return "functional";
        case SkillLevel::atomic: return "atomic";
    }
    return "functional";
}

SkillLevel skill_level_from_string(const std::string& tag) {
    if (tag == "planning") return SkillLevel::planning;
    if (tag == "functional") return SkillLevel::functional;
    if (tag == "atomic") return SkillLevel::atomic;
    throw FormatError("unknown skill level: " + tag);
}

std::string to_string(SkillOrigin origin) {
    switch (origin) {
        case SkillOrigin::extracted: return "extracted";
        case SkillOrigin::merged: return "merged";
        case SkillOrigin::expanded: return "expanded";
    }
    return "extracted";
}

SkillOrigin skill_origin_from_string(const std::string& tag) {
    if (tag == "extracted") return SkillOrigin::extracted;
    if (tag == "merged") return SkillOrigin::merged;
    if (tag == "expanded") return SkillOrigin::expanded;
    throw FormatError("unknown skill origin: " + tag);
}

std::string to_string(UpdateOption option) {
    switch (option) {
        case UpdateOption::add: return "add";
        case UpdateOption::modify: return "modify";
        case UpdateOption::keep: return "keep";
    }
    return "keep";
}

std::vector<std::string> planning_step_lines(const std::string& content) {
    static const std::regex step_re(R"(^\s*#\s*step\s+\d+\s*:)", std::regex::icase);
    std::vector<std::string> steps;
    for (const auto& line : split_lines(content)) {
        if (std::regex_search(line, step_re)) steps.push_back(trim(line));
    }
    return steps;
}

namespace {

// A single tool identifier: no whitespace, no separators that would smuggle
// a second tool into the name slot.
bool is_single_tool_token(const std::string& name) {
    if (name.empty()) return false;
    for (char c : name) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == ';' || c == '|')
            return false;
    }
    return true;
}

}  // namespace

ValidationReport validate_skill(const Skill& skill) {
    ValidationReport report;
    if (trim(skill.name).empty()) report.violations.push_back("name empty");
    if (trim(skill.document).empty()) report.violations.push_back("document empty");
    if (trim(skill.content).empty()) report.violations.push_back("content empty");

    switch (skill.level) {
        case SkillLevel::planning:
            if (planning_step_lines(skill.content).empty())
                report.violations.push_back("planning skill has no steps");
            if (trim(skill.source_task_text).empty())
                report.violations.push_back("planning skill missing source task text");
            break;
        case SkillLevel::atomic:
            if (!is_single_tool_token(skill.name))
                report.violations.push_back("atomic skill name must be exactly one tool identifier");
            if (skill.tools.empty())
                report.violations.push_back("atomic skill lists no tools");
            else if (std::find(skill.tools.begin(), skill.tools.end(), skill.name) ==
                     skill.tools.end())
                report.violations.push_back("atomic skill name is not among its tools");
            break;
        case SkillLevel::functional:
            if (skill.tools.empty()) report.violations.push_back("functional skill lists no tools");
            break;
    }
    return report;
}

const Skill* SkillLibrary::find(const std::string& name) const {
    const auto it = skills_.find(name);
    return it == skills_.end() ? nullptr : &it->second;
}

std::vector<Skill> SkillLibrary::skills_at(SkillLevel level) const {
    std::vector<Skill> out;
    for (const auto& [name, skill] : skills_)
        if (skill.level == level) out.push_back(skill);
    return out;
}

SkillLibrary SkillLibrary::with_iteration(int iteration) const {
    SkillLibrary copy = *this;
    copy.iteration_ = iteration;
    return copy;
}

SkillLibrary SkillLibrary::restore(int version, int iteration, std::vector<Skill> skills,
                                   std::vector<UpdateLogEntry> update_log) {
    SkillLibrary lib;
    lib.version_ = version;
    lib.iteration_ = iteration;
    for (auto& skill : skills) {
        const std::string name = skill.name;
        if (!lib.skills_.emplace(name, std::move(skill)).second)
            throw ValidationError("duplicate skill name in library: " + name);
    }
    lib.update_log_ = std::move(update_log);
    return lib;
}

SkillLibrary apply_update(const SkillLibrary& library, const SkillUpdate& update) {
    switch (update.option) {
        case UpdateOption::keep:
            return library;  // strict no-op, nothing logged

        case UpdateOption::add: {
            if (!update.skill) throw ValidationError("add update carries no skill");
            const Skill& skill = *update.skill;
            const auto report = validate_skill(skill);
            if (!report.ok())
                throw ValidationError("add rejected, skill '" + skill.name +
                                      "' invalid: " + join(report.violations, "; "));
            if (library.contains(skill.name))
                throw DuplicateName("skill already exists: " + skill.name);
            SkillLibrary next = library;
            next.skills_.emplace(skill.name, skill);
            next.version_ += 1;
            next.update_log_.push_back({next.iteration_, UpdateOption::add, skill.name, ""});
            return next;
        }

        case UpdateOption::modify: {
            if (!update.skill) throw ValidationError("modify update carries no skill");
            if (update.modified_from.empty())
                throw ValidationError("modify update carries no modified_from");
            const Skill& skill = *update.skill;
            const auto report = validate_skill(skill);
            if (!report.ok())
                throw ValidationError("modify rejected, skill '" + skill.name +
                                      "' invalid: " + join(report.violations, "; "));
            if (!library.contains(update.modified_from))
                throw UnknownTarget("modify targets unknown skill: " + update.modified_from);
            if (skill.name != update.modified_from && library.contains(skill.name))
                throw NameCollision("modify renames onto existing skill: " + skill.name);
            SkillLibrary next = library;
            next.skills_.erase(update.modified_from);
            next.skills_.emplace(skill.name, skill);
            next.version_ += 1;
            next.update_log_.push_back(
                {next.iteration_, UpdateOption::modify, skill.name, update.modified_from});
            return next;
        }
    }
    throw ValidationError("unreachable update option");
}

LibraryDiff library_diff(const SkillLibrary& a, const SkillLibrary& b) {
    LibraryDiff diff;
    for (const auto& [name, skill_b] : b.skills()) {
        const Skill* skill_a = a.find(name);
        if (skill_a == nullptr) {
            diff.added.push_back(name);
        } else if (skill_a->document != skill_b.document || skill_a->content != skill_b.content ||
                   skill_a->tools != skill_b.tools) {
            diff.modified.push_back(name);
        }
    }
    for (const auto& [name, skill_a] : a.skills()) {
        if (!b.contains(name)) diff.removed.push_back(name);
    }
    return diff;
}

}  // namespace skillx
