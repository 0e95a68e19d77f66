#pragma once

#include <string>
#include <vector>

#include "skillx/environment.hpp"
#include "skillx/gateway.hpp"
#include "skillx/skill.hpp"
#include "skillx/store.hpp"
#include "skillx/trajectory.hpp"

namespace skillx {

inline constexpr int kDefaultStepCap = 40;
inline constexpr int kFeedbackTokenLimit = 1500;

/// m independent rollouts of one task. Episodes end when the policy
/// finishes or the step cap trips; a capped episode is recorded with
/// success=false. The success flag always comes from the environment's
/// evaluator, never from the policy or extractor.
std::vector<Trajectory> rollout(const Task& task, AgentPolicy& policy, Environment& environment,
                                int m, double temperature, int step_cap = kDefaultStepCap,
                                const std::string& skill_prompt = "",
                                const std::vector<std::string>& exploration_targets = {});

struct FeedbackSummary {
    std::string text;
    bool fallback_truncated = false;  // summarizer reply unusable, hard-truncated instead
};

/// Passthrough for observations at or under `token_limit` whitespace
/// tokens (the threshold is strict); longer ones are replaced by the chat
/// gateway's <feedback> summary, falling back to hard truncation when the
/// tags never materialize.
FeedbackSummary summarize_feedback(const std::string& observation, ChatGateway& chat,
                                   const TemplateSet& templates,
                                   int token_limit = kFeedbackTokenLimit,
                                   const std::string& action_text = "");

/// Fixed-layout trajectory rendering used in every extraction prompt.
/// Observations over the token limit are summarized through the gateway.
std::string render_trajectory(const Trajectory& trajectory, ChatGateway& chat,
                              const TemplateSet& templates,
                              int token_limit = kFeedbackTokenLimit);

/// Fixed-layout library rendering ("- name: x (level) ...") used wherever
/// prompts take the current skill collection.
std::string render_library(const SkillLibrary& library);

std::string render_skill(const Skill& skill);

/// Raw update parsed from an extractor reply, before level/provenance
/// stamping.
std::vector<SkillUpdate> parse_update_response(const std::string& text);

/// Distills the ordered high-level plan from a successful trajectory.
/// Precondition: trajectory.success. Throws ParseError when the reply has
/// no <plan> block, EmptyPlan when the block parses to zero steps.
Skill extract_planning_skill(const Trajectory& trajectory, const Task& task, ChatGateway& chat,
                             const TemplateSet& templates, int iteration,
                             SkillOrigin origin = SkillOrigin::extracted);

/// One chat call per plan step; per-step parse failures drop that step's
/// updates and are noted in `log`. Updates come back stamped functional.
std::vector<SkillUpdate> extract_functional_skills(const Trajectory& trajectory,
                                                   const Skill& planning_skill,
                                                   const SkillLibrary& library_snapshot,
                                                   ChatGateway& chat, const TemplateSet& templates,
                                                   int iteration, SkillOrigin origin,
                                                   std::vector<std::string>* log = nullptr);

/// Single-tool extraction; at most one add/modify per call, centered on
/// `tool`. Precondition: the tool was invoked in the trajectory.
std::vector<SkillUpdate> extract_atomic_skills(const Trajectory& trajectory,
                                               const std::string& tool,
                                               const SkillLibrary& library_snapshot,
                                               ChatGateway& chat, const TemplateSet& templates,
                                               int iteration, SkillOrigin origin,
                                               std::vector<std::string>* log = nullptr);

/// Full mining pass over a batch of trajectories: plan, then per-step
/// functional, then atomic per distinct invoked tool, for every successful
/// trajectory. Output order is stabilized by (input trajectory order, then
/// stage) so concurrent extraction cannot reorder candidates.
std::vector<SkillUpdate> mine_candidates(const std::vector<Trajectory>& trajectories,
                                         const SkillLibrary& library_snapshot, ChatGateway& chat,
                                         const TemplateSet& templates, int iteration,
                                         SkillOrigin origin, unsigned jobs = 1,
                                         std::vector<std::string>* log = nullptr);

}  // namespace skillx
