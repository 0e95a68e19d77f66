#include "skillx/refinement.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>

#include "skillx/util.hpp"

namespace skillx {

using nlohmann::json;

ClusterResult cluster_skills(const std::vector<Skill>& candidates,
                             const std::vector<SkillEmbedding>& embeddings,
                             const RefinementConfig& config) {
    if (candidates.size() != embeddings.size())
        throw std::invalid_argument("cluster_skills: candidates and embeddings differ in length");
    const size_t n = candidates.size();
    ClusterResult result;
    if (n == 0) return result;
    for (size_t i = 1; i < n; ++i) {
        if (candidates[i].level != candidates[0].level)
            throw std::invalid_argument("cluster_skills must run per level");
    }

    // eps-neighborhood graph: edge iff cosine >= threshold
    std::vector<std::vector<size_t>> neighbors(n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            const double sim = cosine_similarity(embeddings[i].vector, embeddings[j].vector);
            if (sim >= config.cluster_sim_threshold) {
                neighbors[i].push_back(j);
                neighbors[j].push_back(i);
            }
        }
    }

    // with min_samples = 2 self-inclusive, any point with an edge is core,
    // so clusters are the connected components; isolated points are noise
    std::vector<int> cluster_of(n, -1);
    int next_cluster = 0;
    for (size_t i = 0; i < n; ++i) {
        if (cluster_of[i] != -1) continue;
        if (neighbors[i].size() + 1 < size_t(config.min_cluster_points)) {
            result.noise_indices.push_back(i);
            continue;
        }
        const int id = next_cluster++;
        std::vector<size_t> frontier = {i};
        cluster_of[i] = id;
        while (!frontier.empty()) {
            const size_t cur = frontier.back();
            frontier.pop_back();
            for (size_t nb : neighbors[cur]) {
                if (cluster_of[nb] != -1) continue;
                cluster_of[nb] = id;
                // every member of a pair is core here, so always expand
                frontier.push_back(nb);
            }
        }
    }

    std::vector<std::vector<size_t>> groups(static_cast<size_t>(next_cluster));
    for (size_t i = 0; i < n; ++i)
        if (cluster_of[i] >= 0) groups[size_t(cluster_of[i])].push_back(i);

    for (auto& group : groups) {
        // medoid: member with the highest total similarity to the others
        size_t medoid = group.front();
        double best_total = -1e18;
        for (size_t m : group) {
            double total = 0.0;
            for (size_t other : group)
                if (other != m)
                    total += cosine_similarity(embeddings[m].vector, embeddings[other].vector);
            if (total > best_total ||
                (total == best_total && candidates[m].name < candidates[medoid].name)) {
                best_total = total;
                medoid = m;
            }
        }

        std::vector<size_t> kept = group;
        if (int(kept.size()) > config.cluster_cap) {
            std::sort(kept.begin(), kept.end(), [&](size_t a, size_t b) {
                const double sa = cosine_similarity(embeddings[a].vector, embeddings[medoid].vector);
                const double sb = cosine_similarity(embeddings[b].vector, embeddings[medoid].vector);
                if (sa != sb) return sa > sb;
                return candidates[a].name < candidates[b].name;
            });
            for (size_t k = size_t(config.cluster_cap); k < kept.size(); ++k)
                result.truncated_indices.push_back(kept[k]);
            kept.resize(size_t(config.cluster_cap));
        }
        std::sort(kept.begin(), kept.end(),
                  [&](size_t a, size_t b) { return candidates[a].name < candidates[b].name; });

        SkillCluster cluster;
        cluster.level = candidates[group.front()].level;
        cluster.medoid = candidates[medoid].name;
        cluster.member_indices = kept;
        for (size_t m : kept) cluster.members.push_back(candidates[m].name);
        double total = 0.0;
        int pairs = 0;
        for (size_t a = 0; a < kept.size(); ++a) {
            for (size_t b = a + 1; b < kept.size(); ++b) {
                total += cosine_similarity(embeddings[kept[a]].vector, embeddings[kept[b]].vector);
                ++pairs;
            }
        }
        cluster.mean_similarity = pairs == 0 ? 1.0 : total / pairs;
        result.clusters.push_back(std::move(cluster));
    }

    std::sort(result.clusters.begin(), result.clusters.end(),
              [](const SkillCluster& a, const SkillCluster& b) {
                  return a.members.front() < b.members.front();
              });
    std::sort(result.truncated_indices.begin(), result.truncated_indices.end());
    return result;
}

std::vector<Skill> merge_cluster(const SkillCluster& cluster, const std::vector<Skill>& candidates,
                                 ChatGateway& chat, const TemplateSet& templates, int iteration) {
    if (cluster.member_indices.size() < 2)
        throw std::invalid_argument("merge_cluster requires at least two members");

    std::string skills_block = "[\n";
    for (size_t k = 0; k < cluster.member_indices.size(); ++k) {
        skills_block += render_skill(candidates[cluster.member_indices[k]]);
        if (k + 1 < cluster.member_indices.size()) skills_block += ",";
        skills_block += "\n";
    }
    skills_block += "]";

    const std::string prompt = templates.get("merge").render({{"skills", skills_block}});
    const std::string reply =
        chat.complete({{{"user", prompt}}, /*temperature=*/0.0, /*max_output_tokens=*/4096});

    const size_t open = reply.find("<skill>");
    const size_t close = reply.find("</skill>");
    if (open == std::string::npos || close == std::string::npos || close <= open)
        throw ParseError("merge reply has no <skill> block");
    json doc;
    try {
        doc = json::parse(reply.substr(open + 7, close - open - 7));
    } catch (const json::exception& e) {
        throw ParseError("merge reply <skill> block is not JSON: " + std::string(e.what()));
    }
    if (!doc.is_array() || doc.empty()) throw ParseError("merge reply is not a non-empty array");

    // provenance follows the medoid member
    Provenance provenance;
    for (size_t idx : cluster.member_indices) {
        if (candidates[idx].name == cluster.medoid) {
            provenance = candidates[idx].provenance;
            break;
        }
    }
    provenance.iteration_index = iteration;
    if (provenance.origin != SkillOrigin::expanded) provenance.origin = SkillOrigin::merged;

    std::vector<Skill> merged;
    for (const auto& record : doc) {
        json obj = record;
        if (obj.is_string()) {
            try {
                obj = json::parse(obj.get<std::string>());
            } catch (const json::exception&) {
                throw ParseError("merged skill entry is a string but not JSON");
            }
        }
        Skill skill;
        try {
            skill.name = obj.at("name").get<std::string>();
            skill.document = obj.at("document").get<std::string>();
            skill.content = obj.at("content").get<std::string>();
            for (const auto& t : obj.value("tools", json::array()))
                skill.tools.push_back(t.get<std::string>());
        } catch (const json::exception& e) {
            throw ParseError("merged skill entry malformed: " + std::string(e.what()));
        }
        skill.level = cluster.level;
        skill.provenance = provenance;
        if (skill.level == SkillLevel::planning) {
            // carry the medoid's retrieval key
            for (size_t idx : cluster.member_indices) {
                if (candidates[idx].name == cluster.medoid) {
                    skill.source_task_text = candidates[idx].source_task_text;
                    break;
                }
            }
        }
        const auto report = validate_skill(skill);
        if (!report.ok())
            throw ParseError("merged skill '" + skill.name +
                             "' fails validation: " + join(report.violations, "; "));
        merged.push_back(std::move(skill));
    }
    return merged;
}

bool general_filter(const Skill& skill, ChatGateway& chat, const TemplateSet& templates) {
    const std::string prompt =
        templates.get("general_filter").render({{"skill", render_skill(skill)}});
    for (int attempt = 0; attempt < 2; ++attempt) {
        const std::string reply =
            chat.complete({{{"user", prompt}}, /*temperature=*/0.0, /*max_output_tokens=*/16});
        std::string verdict = to_lower(trim(reply));
        while (!verdict.empty() && std::ispunct(static_cast<unsigned char>(verdict.back())))
            verdict.pop_back();
        if (verdict.rfind("good", 0) == 0) return true;
        if (verdict.rfind("bad", 0) == 0) return false;
    }
    return false;  // conservative
}

namespace {

struct ParsedCall {
    std::string tool;
    std::vector<std::pair<std::string, std::string>> keyword_args;  // name -> raw value text
    bool has_ellipsis = false;  // "..." marks caller-supplied arguments
};

enum class LiteralKind { string_lit, integer_lit, float_lit, boolean_lit, array_lit, object_lit, placeholder };

LiteralKind classify_literal(const std::string& raw) {
    const std::string v = trim(raw);
    if (v.empty()) return LiteralKind::placeholder;
    if ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))
        return LiteralKind::string_lit;
    if (v == "true" || v == "false" || v == "True" || v == "False")
        return LiteralKind::boolean_lit;
    if (v.front() == '[') return LiteralKind::array_lit;
    if (v.front() == '{' && v.back() == '}') {
        // {name} style placeholder vs object literal
        static const std::regex placeholder_re(R"(^\{[A-Za-z_][A-Za-z0-9_]*\}$)");
        return std::regex_match(v, placeholder_re) ? LiteralKind::placeholder
                                                   : LiteralKind::object_lit;
    }
    static const std::regex int_re(R"(^-?\d+$)");
    if (std::regex_match(v, int_re)) return LiteralKind::integer_lit;
    static const std::regex float_re(R"(^-?\d+\.\d*(?:[eE][+-]?\d+)?$)");
    if (std::regex_match(v, float_re)) return LiteralKind::float_lit;
    return LiteralKind::placeholder;
}

bool literal_matches(LiteralKind kind, ParamType type) {
    switch (type) {
        case ParamType::string_t: return kind == LiteralKind::string_lit;
        case ParamType::integer_t: return kind == LiteralKind::integer_lit;
        case ParamType::number_t:
            return kind == LiteralKind::integer_lit || kind == LiteralKind::float_lit;
        case ParamType::boolean_t: return kind == LiteralKind::boolean_lit;
        case ParamType::array_t: return kind == LiteralKind::array_lit;
        case ParamType::object_t: return kind == LiteralKind::object_lit;
    }
    return false;
}

/// Scans `content` for identifier(...) call patterns, splitting arguments
/// at top-level commas and collecting keyword arguments.
std::vector<ParsedCall> parse_call_patterns(const std::string& content) {
    std::vector<ParsedCall> calls;
    static const std::regex head_re(R"(([A-Za-z_][A-Za-z0-9_]*)\s*\()");
    auto begin = std::sregex_iterator(content.begin(), content.end(), head_re);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        ParsedCall call;
        call.tool = (*it)[1].str();
        size_t pos = size_t(it->position(0)) + size_t(it->length(0));
        int depth = 1;
        char quote = '\0';
        std::string arg;
        std::vector<std::string> raw_args;
        for (; pos < content.size() && depth > 0; ++pos) {
            const char c = content[pos];
            if (quote != '\0') {
                arg.push_back(c);
                if (c == quote) quote = '\0';
                continue;
            }
            if (c == '"' || c == '\'') {
                quote = c;
                arg.push_back(c);
                continue;
            }
            if (c == '(' || c == '[' || c == '{') ++depth;
            if (c == ')' || c == ']' || c == '}') --depth;
            if (depth == 0) break;
            if (c == ',' && depth == 1) {
                raw_args.push_back(arg);
                arg.clear();
                continue;
            }
            arg.push_back(c);
        }
        if (depth != 0) continue;  // unbalanced: not a call pattern
        if (!trim(arg).empty() || !raw_args.empty()) raw_args.push_back(arg);

        for (const auto& raw : raw_args) {
            const std::string a = trim(raw);
            if (a == "...") {
                call.has_ellipsis = true;
                continue;
            }
            const size_t eq = a.find('=');
            if (eq == std::string::npos) continue;  // positional: not checkable
            const std::string key = trim(a.substr(0, eq));
            static const std::regex ident_re(R"(^[A-Za-z_][A-Za-z0-9_]*$)");
            if (!std::regex_match(key, ident_re)) continue;
            call.keyword_args.emplace_back(key, trim(a.substr(eq + 1)));
        }
        calls.push_back(std::move(call));
    }
    return calls;
}

}  // namespace

ValidationReport tool_schema_static_check(const Skill& skill, const ToolSchemaSet& schemas) {
    ValidationReport report;
    for (const auto& tool : skill.tools) {
        if (!schemas.contains(tool))
            report.violations.push_back("nonexistent tool '" + tool + "' in tools list");
    }
    for (const auto& call : parse_call_patterns(skill.content)) {
        const ToolSchema* schema = schemas.find(call.tool);
        if (schema == nullptr) {
            report.violations.push_back("nonexistent tool '" + call.tool + "' called in content");
            continue;
        }
        for (const auto& [key, value] : call.keyword_args) {
            const ParamSpec* spec = schema->find_param(key);
            if (spec == nullptr) {
                report.violations.push_back("unknown parameter '" + key + "' for tool '" +
                                            call.tool + "'");
                continue;
            }
            const LiteralKind kind = classify_literal(value);
            if (kind != LiteralKind::placeholder && !literal_matches(kind, spec->type))
                report.violations.push_back("parameter '" + key + "' of tool '" + call.tool +
                                            "' expects " + to_string(spec->type) +
                                            ", got literal " + value);
        }
        if (!call.has_ellipsis) {
            for (const auto& spec : schema->parameters) {
                if (!spec.required) continue;
                const bool present = std::any_of(
                    call.keyword_args.begin(), call.keyword_args.end(),
                    [&](const auto& kv) { return kv.first == spec.name; });
                if (!present)
                    report.violations.push_back("call to '" + call.tool +
                                                "' omits required parameter '" + spec.name + "'");
            }
        }
    }
    return report;
}

bool tool_schema_llm_check(const Skill& skill, const ToolSchemaSet& schemas, ChatGateway& chat,
                           const TemplateSet& templates) {
    // render only the schemas the skill touches
    std::set<std::string> referenced(skill.tools.begin(), skill.tools.end());
    for (const auto& call : parse_call_patterns(skill.content)) referenced.insert(call.tool);
    std::string specs;
    for (const auto& tool : referenced) {
        const ToolSchema* schema = schemas.find(tool);
        if (schema == nullptr) continue;
        ToolSchemaSet one({*schema});
        specs += one.render() + "\n";
    }
    if (specs.empty()) specs = schemas.render();

    const std::string prompt = templates.get("tool_schema_filter")
                                   .render({{"invocations", render_skill(skill)},
                                            {"tool_specs", specs}});
    static const std::regex answer_re(R"(<answer>\s*(correct|fail)\s*</answer>)",
                                      std::regex::icase);
    for (int attempt = 0; attempt < 2; ++attempt) {
        const std::string reply =
            chat.complete({{{"user", prompt}}, /*temperature=*/0.0, /*max_output_tokens=*/1024});
        std::smatch match;
        if (std::regex_search(reply, match, answer_re))
            return to_lower(match[1].str()) == "correct";
    }
    return false;
}

nlohmann::json RefineReport::to_json() const {
    return json{{"iteration", iteration},
                {"candidates_in", candidates_in},
                {"clusters", clusters},
                {"merged_out", merged_out},
                {"filtered_general", filtered_general},
                {"filtered_static", filtered_static},
                {"filtered_llm", filtered_llm},
                {"updates", {{"add", updates_add}, {"modify", updates_modify}, {"keep", updates_keep}}}};
}

namespace {

struct Candidate {
    Skill skill;
    std::string modified_from;  // empty unless an extractor flagged it
};

void note(std::vector<std::string>* log, const std::string& message) {
    if (log != nullptr) log->push_back(message);
}

std::string fresh_name(const std::string& base, const SkillLibrary& library,
                       const std::set<std::string>& taken) {
    if (!library.contains(base) && !taken.count(base)) return base;
    for (int i = 2;; ++i) {
        const std::string candidate = base + " v" + std::to_string(i);
        if (!library.contains(candidate) && !taken.count(candidate)) return candidate;
    }
}

// payload equality ignores provenance: re-extracting the same skill in a
// later round is a keep, not a new add
bool same_payload(const Skill& a, const Skill& b) {
    return a.name == b.name && a.document == b.document && a.content == b.content &&
           a.tools == b.tools && a.level == b.level;
}

}  // namespace

RefineResult refine(const std::vector<SkillUpdate>& extracted, const SkillLibrary& library,
                    RefineContext& context, int iteration) {
    RefineResult result;
    result.report.iteration = iteration;

    std::vector<Candidate> candidates;
    for (const auto& update : extracted) {
        if (update.option == UpdateOption::keep) {
            result.report.updates_keep += 1;
            continue;
        }
        if (!update.skill) continue;
        const auto report = validate_skill(*update.skill);
        if (!report.ok()) {
            note(context.log, "candidate '" + update.skill->name +
                                  "' dropped before refinement: " + join(report.violations, "; "));
            continue;
        }
        candidates.push_back({*update.skill, update.modified_from});
    }
    result.report.candidates_in = int(candidates.size());

    std::vector<Candidate> pool;  // post-merge, pre-filter, deterministic order
    for (SkillLevel level : {SkillLevel::planning, SkillLevel::functional, SkillLevel::atomic}) {
        std::vector<Candidate> of_level;
        for (const auto& c : candidates)
            if (c.skill.level == level) of_level.push_back(c);
        if (of_level.empty()) continue;

        std::vector<Skill> skills;
        skills.reserve(of_level.size());
        for (const auto& c : of_level) skills.push_back(c.skill);
        const auto embeddings = context.cache.embed_skills(context.embedder, skills);
        const auto clustered = cluster_skills(skills, embeddings, context.config);
        result.report.clusters += int(clustered.clusters.size());

        for (size_t idx : clustered.truncated_indices)
            note(context.log, "cluster cap dropped redundant candidate '" +
                                  of_level[idx].skill.name + "'");

        // merges for distinct clusters may run concurrently
        std::vector<std::vector<Skill>> merged(clustered.clusters.size());
        std::vector<bool> merge_failed(clustered.clusters.size(), false);
        parallel_for_indexed(clustered.clusters.size(), context.jobs, [&](size_t ci) {
            try {
                merged[ci] = merge_cluster(clustered.clusters[ci], skills, context.chat,
                                           context.templates, iteration);
            } catch (const Error&) {
                merge_failed[ci] = true;
            }
        });

        for (size_t i : clustered.noise_indices) pool.push_back(of_level[i]);
        for (size_t ci = 0; ci < clustered.clusters.size(); ++ci) {
            const SkillCluster& cluster = clustered.clusters[ci];
            if (merge_failed[ci]) {
                // unusable merge reply: members pass through individually
                note(context.log, "merge failed for cluster around '" + cluster.medoid +
                                      "'; members pass through unmerged");
                for (size_t idx : cluster.member_indices) pool.push_back(of_level[idx]);
                continue;
            }
            result.report.merged_out += int(merged[ci].size());
            // a lone merged skill inherits a unanimous modify flag
            std::set<std::string> flags;
            for (size_t idx : cluster.member_indices)
                if (!of_level[idx].modified_from.empty())
                    flags.insert(of_level[idx].modified_from);
            const std::string inherited =
                (merged[ci].size() == 1 && flags.size() == 1) ? *flags.begin() : "";
            for (auto& skill : merged[ci]) pool.push_back({std::move(skill), inherited});
        }
    }

    // two-stage filter; calls for distinct skills may run concurrently
    enum class Verdict { pass, general_bad, static_bad, llm_bad };
    std::vector<Verdict> verdicts(pool.size(), Verdict::pass);
    parallel_for_indexed(pool.size(), context.jobs, [&](size_t i) {
        const Skill& skill = pool[i].skill;
        if (!general_filter(skill, context.chat, context.templates)) {
            verdicts[i] = Verdict::general_bad;
            return;
        }
        if (!tool_schema_static_check(skill, context.schemas).ok()) {
            verdicts[i] = Verdict::static_bad;
            return;
        }
        if (!tool_schema_llm_check(skill, context.schemas, context.chat, context.templates))
            verdicts[i] = Verdict::llm_bad;
    });

    std::vector<Candidate> survivors;
    for (size_t i = 0; i < pool.size(); ++i) {
        switch (verdicts[i]) {
            case Verdict::pass: survivors.push_back(pool[i]); break;
            case Verdict::general_bad:
                result.report.filtered_general += 1;
                note(context.log, "general filter rejected '" + pool[i].skill.name + "'");
                break;
            case Verdict::static_bad:
                result.report.filtered_static += 1;
                note(context.log, "static schema check rejected '" + pool[i].skill.name + "'");
                break;
            case Verdict::llm_bad:
                result.report.filtered_llm += 1;
                note(context.log, "schema filter prompt rejected '" + pool[i].skill.name + "'");
                break;
        }
    }

    // convert survivors into updates: add when the name is new, modify when
    // an extractor flagged a resolvable target, otherwise add under a fresh
    // name. Exact duplicates collapse.
    std::sort(survivors.begin(), survivors.end(), [](const Candidate& a, const Candidate& b) {
        if (a.skill.level != b.skill.level) return int(a.skill.level) < int(b.skill.level);
        return a.skill.name < b.skill.name;
    });
    std::set<std::string> taken;
    std::vector<Candidate> seen;  // pre-rename payloads, for batch dedup
    for (const auto& candidate : survivors) {
        const bool duplicate = std::any_of(seen.begin(), seen.end(), [&](const Candidate& e) {
            return same_payload(e.skill, candidate.skill) &&
                   e.modified_from == candidate.modified_from;
        });
        if (duplicate) continue;
        seen.push_back(candidate);

        Candidate out = candidate;
        SkillUpdate update;
        if (!out.modified_from.empty() && library.contains(out.modified_from)) {
            update.option = UpdateOption::modify;
            update.modified_from = out.modified_from;
            if (out.skill.name != out.modified_from &&
                (library.contains(out.skill.name) || taken.count(out.skill.name)))
                out.skill.name = fresh_name(out.skill.name, library, taken);
            result.report.updates_modify += 1;
        } else {
            const Skill* existing = library.find(out.skill.name);
            if (existing != nullptr && same_payload(*existing, out.skill)) {
                result.report.updates_keep += 1;  // unchanged re-extraction
                continue;
            }
            update.option = UpdateOption::add;
            out.skill.name = fresh_name(out.skill.name, library, taken);
            result.report.updates_add += 1;
        }
        taken.insert(out.skill.name);
        update.skill = out.skill;
        result.updates.push_back(std::move(update));
    }
    std::sort(result.updates.begin(), result.updates.end(),
              [](const SkillUpdate& a, const SkillUpdate& b) {
                  return a.skill->name < b.skill->name;
              });
    return result;
}

std::vector<SkillLibrary> iterate(const SkillLibrary& initial, const std::vector<Task>& train_tasks,
                                  AgentPolicy& policy, Environment& environment, int rounds,
                                  IterateContext& context) {
    if (rounds < 0 || rounds > context.refinement.max_iterations)
        throw std::invalid_argument("rounds must lie in [0, " +
                                    std::to_string(context.refinement.max_iterations) + "]");

    std::vector<SkillLibrary> snapshots = {initial};
    double previous_score = 0.0;
    bool have_previous = false;
    if (context.eval_hook) {
        previous_score = context.eval_hook(initial);
        have_previous = true;
    }

    SkillLibrary current = initial;
    for (int round = 1; round <= rounds; ++round) {
        // retrieval conditioned on the current library
        std::optional<Retriever> retriever;
        if (!current.empty())
            retriever.emplace(current, context.chat, context.embedder, context.cache,
                              context.templates, context.retrieval);

        std::vector<std::vector<Trajectory>> per_task(train_tasks.size());
        parallel_for_indexed(train_tasks.size(), context.jobs, [&](size_t i) {
            const Task& task = train_tasks[i];
            std::string prompt;
            if (retriever) {
                const RetrievalBundle bundle = retriever->retrieve(task.text);
                prompt = assemble_prompt(bundle, context.retrieval);
            }
            per_task[i] = rollout(task, policy, environment, context.rollouts_per_task,
                                  context.temperature, context.step_cap, prompt);
        });

        std::vector<Trajectory> trajectories;
        for (auto& batch : per_task)
            trajectories.insert(trajectories.end(), std::make_move_iterator(batch.begin()),
                                std::make_move_iterator(batch.end()));
        if (context.trajectory_sink) context.trajectory_sink(round, trajectories);

        const int iteration = current.iteration() + 1;
        SkillLibrary staged = current.with_iteration(iteration);

        const auto candidates =
            mine_candidates(trajectories, staged, context.chat, context.templates, iteration,
                            context.origin, context.jobs, context.log);

        RefineContext refine_context{context.chat,      context.embedder, context.cache,
                                     context.templates, context.schemas,  context.refinement,
                                     context.jobs,      context.log};
        RefineResult refined = refine(candidates, staged, refine_context, iteration);
        if (context.report_sink) context.report_sink(refined.report);

        for (const auto& update : refined.updates) staged = apply_update(staged, update);
        current = staged;
        snapshots.push_back(current);

        if (context.eval_hook) {
            const double score = context.eval_hook(current);
            if (have_previous && score <= previous_score) break;  // no improvement
            previous_score = score;
            have_previous = true;
        }
    }
    return snapshots;
}

}  // namespace skillx
