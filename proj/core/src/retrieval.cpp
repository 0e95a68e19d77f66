#include "skillx/retrieval.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "skillx/util.hpp"

namespace skillx {

using nlohmann::json;

std::vector<ScoredCandidate> hybrid_threshold_filter(const std::vector<ScoredCandidate>& candidates,
                                                     const RetrievalConfig& config) {
    if (candidates.empty()) return {};
    const double best = candidates.front().similarity;
    std::vector<ScoredCandidate> kept;
    for (const auto& c : candidates) {
        if (c.similarity >= config.min_similarity && best - c.similarity <= config.best_match_band)
            kept.push_back(c);
    }
    return kept;
}

namespace {
void sort_by_score(std::vector<ScoredCandidate>& candidates) {
    std::sort(candidates.begin(), candidates.end(),
              [](const ScoredCandidate& a, const ScoredCandidate& b) {
                  if (a.similarity != b.similarity) return a.similarity > b.similarity;
                  return a.name < b.name;
              });
}
}  // namespace

std::vector<ScoredCandidate> semantic_dedup(const std::vector<ScoredCandidate>& candidates,
                                            const RetrievalConfig& config) {
    std::vector<ScoredCandidate> ordered = candidates;
    sort_by_score(ordered);
    std::vector<ScoredCandidate> kept;
    for (const auto& c : ordered) {
        bool duplicate = false;
        for (const auto& k : kept) {
            if (cosine_similarity(c.vector, k.vector) > config.dedup_threshold) {
                duplicate = true;  // "exceeds" is strict: equality survives
                break;
            }
        }
        if (!duplicate) kept.push_back(c);
    }
    return kept;
}

std::vector<ScoredCandidate> mmr_select(const std::vector<ScoredCandidate>& candidates,
                                        const RetrievalConfig& config) {
    if (candidates.empty()) return {};
    const double lambda = config.mmr_lambda;

    std::vector<ScoredCandidate> remaining = candidates;
    sort_by_score(remaining);

    std::vector<ScoredCandidate> selected;
    std::vector<double> max_sim_to_selected(remaining.size(), 0.0);
    std::vector<bool> used(remaining.size(), false);

    // seed: highest query similarity (list head after the sort)
    selected.push_back(remaining.front());
    used[0] = true;
    for (size_t i = 1; i < remaining.size(); ++i)
        max_sim_to_selected[i] = cosine_similarity(remaining[i].vector, remaining[0].vector);

    while (int(selected.size()) < config.final_cap) {
        int best = -1;
        double best_score = 0.0;
        for (size_t i = 0; i < remaining.size(); ++i) {
            if (used[i]) continue;
            const double score =
                lambda * remaining[i].similarity - (1.0 - lambda) * max_sim_to_selected[i];
            if (best < 0 || score > best_score ||
                (score == best_score && remaining[i].name < remaining[size_t(best)].name)) {
                best = int(i);
                best_score = score;
            }
        }
        if (best < 0) break;
        used[size_t(best)] = true;
        selected.push_back(remaining[size_t(best)]);
        for (size_t i = 0; i < remaining.size(); ++i) {
            if (used[i]) continue;
            max_sim_to_selected[i] =
                std::max(max_sim_to_selected[i],
                         cosine_similarity(remaining[i].vector, remaining[size_t(best)].vector));
        }
    }
    return selected;
}

std::vector<ScoredCandidate> cross_step_dedup(
    const std::vector<std::vector<ScoredCandidate>>& per_step, const RetrievalConfig& config) {
    std::map<std::string, ScoredCandidate> best_by_name;
    for (const auto& step : per_step) {
        for (const auto& c : step) {
            auto [it, inserted] = best_by_name.emplace(c.name, c);
            if (!inserted && c.similarity > it->second.similarity) it->second = c;
        }
    }
    std::vector<ScoredCandidate> unified;
    unified.reserve(best_by_name.size());
    for (const auto& [name, c] : best_by_name) unified.push_back(c);
    sort_by_score(unified);
    return semantic_dedup(unified, config);
}

json RetrievalTrace::to_json() const {
    return json{{"planning_candidates", planning_candidates},
                {"planning_kept", planning_kept},
                {"plan_steps", plan_steps},
                {"broad_hits", broad_hits},
                {"after_union_dedup", after_union_dedup},
                {"after_mmr", after_mmr},
                {"after_self_filter", after_self_filter},
                {"rewrite_fallback", rewrite_fallback},
                {"self_filter_fallback", self_filter_fallback}};
}

json RetrievalBundle::to_json() const {
    json steps = json::array();
    for (const auto& step : pseudo_plan)
        steps.push_back({{"ordinal", step.ordinal},
                         {"goal", step.goal_text},
                         {"key_tools", step.key_tools}});
    json picked = json::array();
    for (const auto& [skill, similarity] : selected)
        picked.push_back({{"name", skill.name},
                          {"level", to_string(skill.level)},
                          {"similarity", similarity}});
    json plans = json::array();
    for (const auto& plan : planning_skills) plans.push_back(plan.name);
    return json{{"plan_steps", std::move(steps)},
                {"planning_skills", std::move(plans)},
                {"selected", std::move(picked)},
                {"trace", trace.to_json()}};
}

std::string assemble_prompt(const RetrievalBundle& bundle, const RetrievalConfig& config) {
    std::string out;
    if (config.include_planning_in_prompt && !bundle.planning_skills.empty()) {
        out += "## Reference plans\n";
        for (const auto& plan : bundle.planning_skills) {
            out += "### " + plan.name + "\n";
            out += plan.content + "\n";
        }
    }
    std::string functional;
    std::string atomic;
    for (const auto& [skill, similarity] : bundle.selected) {
        std::string entry = "### " + skill.name + "\n";
        entry += "document: " + skill.document + "\n";
        entry += "content: " + skill.content + "\n";
        if (!skill.tools.empty()) entry += "tools: " + join(skill.tools, ", ") + "\n";
        if (skill.level == SkillLevel::atomic)
            atomic += entry;
        else
            functional += entry;
    }
    if (!functional.empty()) out += "## Functional skills\n" + functional;
    if (!atomic.empty()) out += "## Atomic skills\n" + atomic;
    return out;
}

Retriever::Retriever(const SkillLibrary& library, ChatGateway& chat, EmbeddingGateway& embedder,
                     EmbeddingCache& cache, const TemplateSet& templates, RetrievalConfig config)
    : library_(library),
      chat_(chat),
      embedder_(embedder),
      cache_(cache),
      templates_(templates),
      config_(config) {
    const auto planning = library.skills_at(SkillLevel::planning);
    if (!planning.empty())
        planning_index_ = AnnIndex::build(cache_.embed_skills(embedder_, planning));

    std::vector<Skill> rest = library.skills_at(SkillLevel::functional);
    const auto atomic = library.skills_at(SkillLevel::atomic);
    rest.insert(rest.end(), atomic.begin(), atomic.end());
    std::sort(rest.begin(), rest.end(),
              [](const Skill& a, const Skill& b) { return a.name < b.name; });
    if (!rest.empty()) skill_index_ = AnnIndex::build(cache_.embed_skills(embedder_, rest));
}

std::vector<ScoredCandidate> Retriever::search_stage(const AnnIndex& index,
                                                     const Vec& query) const {
    std::vector<ScoredCandidate> candidates;
    for (const auto& hit : index.search(query, config_.broad_k)) {
        const Vec* stored = index.vector_of(hit.name);
        candidates.push_back({hit.name, hit.similarity, stored ? *stored : Vec{}});
    }
    return hybrid_threshold_filter(candidates, config_);
}

std::vector<Skill> Retriever::retrieve_planning(const std::string& query,
                                                RetrievalTrace* trace) const {
    if (!planning_index_) return {};
    const Vec query_vec = cache_.embed_texts(embedder_, {query}).front();
    auto kept = search_stage(*planning_index_, query_vec);
    if (trace != nullptr) trace->planning_candidates = int(kept.size());
    if (int(kept.size()) > config_.planning_cap) kept.resize(size_t(config_.planning_cap));
    if (trace != nullptr) trace->planning_kept = int(kept.size());
    std::vector<Skill> out;
    for (const auto& c : kept) {
        const Skill* skill = library_.find(c.name);
        if (skill != nullptr) out.push_back(*skill);
    }
    return out;
}

std::vector<PseudoPlanStep> Retriever::rewrite_pseudo_plan(const std::string& query,
                                                           const std::vector<Skill>& planning_skills,
                                                           RetrievalTrace* trace) const {
    std::string plans;
    if (planning_skills.empty()) {
        plans = "(no reference plans retrieved)";
    } else {
        for (const auto& plan : planning_skills)
            plans += "reference plan (" + plan.name + "):\n" + plan.content + "\n";
    }
    const std::string prompt =
        templates_.get("pseudo_plan_rewrite").render({{"task", query}, {"plans", plans}});
    const std::string reply =
        chat_.complete({{{"user", prompt}}, /*temperature=*/0.0, /*max_output_tokens=*/1024});

    std::string body = reply;
    const size_t open = reply.find("<plan>");
    const size_t close = reply.find("</plan>");
    if (open != std::string::npos && close != std::string::npos && close > open)
        body = reply.substr(open + 6, close - open - 6);
    auto steps = parse_plan_steps(body);
    if (steps.empty()) {
        // degenerate fallback: the raw query is the whole plan
        if (trace != nullptr) trace->rewrite_fallback = true;
        steps.push_back({1, query, {}});
    }
    if (trace != nullptr) trace->plan_steps = int(steps.size());
    return steps;
}

std::vector<std::vector<ScoredCandidate>> Retriever::retrieve_for_plan(
    const std::vector<PseudoPlanStep>& pseudo_plan) const {
    std::vector<std::vector<ScoredCandidate>> per_step(pseudo_plan.size());
    if (!skill_index_) return per_step;
    std::vector<std::string> goals;
    goals.reserve(pseudo_plan.size());
    for (const auto& step : pseudo_plan) goals.push_back(step.goal_text);
    const auto vectors = cache_.embed_texts(embedder_, goals);
    for (size_t i = 0; i < pseudo_plan.size(); ++i)
        per_step[i] = search_stage(*skill_index_, vectors[i]);
    return per_step;
}

std::vector<ScoredCandidate> Retriever::self_filter(const std::string& query,
                                                    const std::vector<PseudoPlanStep>& pseudo_plan,
                                                    const std::vector<ScoredCandidate>& candidates,
                                                    RetrievalTrace* trace) const {
    if (candidates.empty()) return candidates;

    std::string listing;
    for (const auto& c : candidates) {
        const Skill* skill = library_.find(c.name);
        listing += "- name: " + c.name + "\n";
        if (skill != nullptr) listing += "  document: " + skill->document + "\n";
    }
    const std::string prompt = templates_.get("self_filter")
                                   .render({{"task", query},
                                            {"plan", format_plan_steps(pseudo_plan)},
                                            {"skills", listing}});
    const std::string reply =
        chat_.complete({{{"user", prompt}}, /*temperature=*/0.0, /*max_output_tokens=*/512});

    std::set<std::string> wanted;
    bool parsed = false;
    const size_t open = reply.find('[');
    const size_t close = reply.rfind(']');
    if (open != std::string::npos && close != std::string::npos && close > open) {
        try {
            const json names = json::parse(reply.substr(open, close - open + 1));
            if (names.is_array()) {
                for (const auto& n : names)
                    if (n.is_string()) wanted.insert(n.get<std::string>());
                parsed = true;
            }
        } catch (const json::exception&) {
            parsed = false;
        }
    }

    std::vector<ScoredCandidate> kept;
    if (parsed) {
        for (const auto& c : candidates)
            if (wanted.count(c.name)) kept.push_back(c);  // unknown names are ignored
    }
    if (!parsed || kept.empty()) {
        // fail-open: a parse hiccup must not drop the whole bundle
        if (trace != nullptr) trace->self_filter_fallback = true;
        return candidates;
    }
    return kept;
}

RetrievalBundle Retriever::retrieve(const std::string& query) const {
    RetrievalBundle bundle;
    bundle.planning_skills = retrieve_planning(query, &bundle.trace);
    bundle.pseudo_plan = rewrite_pseudo_plan(query, bundle.planning_skills, &bundle.trace);

    const auto per_step = retrieve_for_plan(bundle.pseudo_plan);
    for (const auto& step : per_step) bundle.trace.broad_hits += int(step.size());

    const auto unified = cross_step_dedup(per_step, config_);
    bundle.trace.after_union_dedup = int(unified.size());

    const auto diverse = mmr_select(unified, config_);
    bundle.trace.after_mmr = int(diverse.size());

    const auto final_set = self_filter(query, bundle.pseudo_plan, diverse, &bundle.trace);
    bundle.trace.after_self_filter = int(final_set.size());

    for (const auto& c : final_set) {
        const Skill* skill = library_.find(c.name);
        if (skill != nullptr) bundle.selected.emplace_back(*skill, c.similarity);
    }
    return bundle;
}

}  // namespace skillx
