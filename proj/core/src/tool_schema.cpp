#include "skillx/tool_schema.hpp"

#include <set>

#include "skillx/util.hpp"

namespace skillx {

std::string to_string(ParamType type) {
    switch (type) {
        case ParamType::string_t: return "string";
        case ParamType::integer_t: return "integer";
        case ParamType::number_t: return "number";
        case ParamType::boolean_t: return "boolean";
        case ParamType::object_t: return "object";
        case ParamType::array_t: return "array";
    }
    return "string";
}

ParamType param_type_from_string(const std::string& tag) {
    if (tag == "string") return ParamType::string_t;
    if (tag == "integer") return ParamType::integer_t;
    if (tag == "number") return ParamType::number_t;
    if (tag == "boolean") return ParamType::boolean_t;
    if (tag == "object") return ParamType::object_t;
    if (tag == "array") return ParamType::array_t;
    throw FormatError("unknown parameter type: " + tag);
}

const ParamSpec* ToolSchema::find_param(const std::string& param_name) const {
    for (const auto& p : parameters)
        if (p.name == param_name) return &p;
    return nullptr;
}

ToolSchemaSet::ToolSchemaSet(std::vector<ToolSchema> tools) {
    for (auto& tool : tools) {
        std::set<std::string> param_names;
        for (const auto& p : tool.parameters) {
            if (!param_names.insert(p.name).second)
                throw DuplicateTool("tool '" + tool.name + "' declares parameter '" + p.name +
                                    "' twice");
        }
        const std::string name = tool.name;
        if (!by_name_.emplace(name, std::move(tool)).second)
            throw DuplicateTool("duplicate tool schema: " + name);
    }
}

const ToolSchema* ToolSchemaSet::find(const std::string& name) const {
    const auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : &it->second;
}

std::vector<std::string> ToolSchemaSet::names() const {
    std::vector<std::string> out;
    out.reserve(by_name_.size());
    for (const auto& [name, tool] : by_name_) out.push_back(name);
    return out;
}

std::string ToolSchemaSet::render() const {
    std::vector<std::string> blocks;
    for (const auto& [name, tool] : by_name_) {
        std::string block = "tool: " + name + "\n  description: " + tool.description;
        for (const auto& p : tool.parameters) {
            block += "\n  param: " + p.name + " (" + to_string(p.type) +
                     (p.required ? ", required" : ", optional") + ") " + p.description;
        }
        if (!tool.returns.empty()) block += "\n  returns: " + tool.returns;
        blocks.push_back(std::move(block));
    }
    return join(blocks, "\n");
}

}  // namespace skillx
