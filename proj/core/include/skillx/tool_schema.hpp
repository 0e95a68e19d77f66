#pragma once

#include <map>
#include <string>
#include <vector>

#include "skillx/errors.hpp"

namespace skillx {

enum class ParamType { string_t, integer_t, number_t, boolean_t, object_t, array_t };

std::string to_string(ParamType type);
ParamType param_type_from_string(const std::string& tag);

struct ParamSpec {
    std::string name;
    ParamType type = ParamType::string_t;
    bool required = false;
    std::string description;
};

struct ToolSchema {
    std::string name;
    std::string description;
    std::vector<ParamSpec> parameters;  // parameter names unique per tool
    std::string returns;

    const ParamSpec* find_param(const std::string& param_name) const;
};

/// Name-keyed set of tool schemas; the validated tool universe.
class ToolSchemaSet {
public:
    ToolSchemaSet() = default;
    explicit ToolSchemaSet(std::vector<ToolSchema> tools);

    bool contains(const std::string& name) const { return by_name_.count(name) > 0; }
    const ToolSchema* find(const std::string& name) const;
    size_t size() const { return by_name_.size(); }

    /// Tool names in ascending order.
    std::vector<std::string> names() const;

    const std::map<std::string, ToolSchema>& tools() const { return by_name_; }

    /// Human-readable rendering for filter prompts.
    std::string render() const;

private:
    std::map<std::string, ToolSchema> by_name_;
};

}  // namespace skillx
