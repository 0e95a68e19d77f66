#include "skillx/config.hpp"

#include "skillx/store.hpp"

namespace skillx {

using nlohmann::json;

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw FormatError("config is not valid JSON: " + std::string(e.what()));
    }
    PipelineConfig config;
    config.apply_json(doc);
    return config;
}

void PipelineConfig::apply_json(const json& doc) {
    library_path = doc.value("library", library_path);
    schemas_path = doc.value("schemas", schemas_path);
    tasks_path = doc.value("tasks", tasks_path);
    fixture_path = doc.value("fixture", fixture_path);
    templates_dir = doc.value("templates", templates_dir);
    mock_table_path = doc.value("mock_table", mock_table_path);
    out_dir = doc.value("out", out_dir);

    embedding_dimension = doc.value("embedding_dimension", embedding_dimension);
    retry_attempts = doc.value("retry_attempts", retry_attempts);
    retry_backoff_ms = doc.value("retry_backoff_ms", retry_backoff_ms);
    chat_model = doc.value("chat_model", chat_model);
    embed_model = doc.value("embed_model", embed_model);

    rollouts_per_task = doc.value("rollouts_per_task", rollouts_per_task);
    extraction_temperature = doc.value("extraction_temperature", extraction_temperature);
    step_cap = doc.value("step_cap", step_cap);

    if (doc.contains("refinement")) {
        const json& r = doc["refinement"];
        refinement.cluster_sim_threshold =
            r.value("cluster_sim_threshold", refinement.cluster_sim_threshold);
        refinement.cluster_cap = r.value("cluster_cap", refinement.cluster_cap);
        refinement.max_iterations = r.value("max_iterations", refinement.max_iterations);
        refinement.min_cluster_points = r.value("min_cluster_points", refinement.min_cluster_points);
    }
    if (doc.contains("retrieval")) {
        const json& r = doc["retrieval"];
        retrieval.broad_k = r.value("broad_k", retrieval.broad_k);
        retrieval.min_similarity = r.value("min_similarity", retrieval.min_similarity);
        retrieval.best_match_band = r.value("best_match_band", retrieval.best_match_band);
        retrieval.dedup_threshold = r.value("dedup_threshold", retrieval.dedup_threshold);
        retrieval.mmr_lambda = r.value("mmr_lambda", retrieval.mmr_lambda);
        retrieval.final_cap = r.value("final_cap", retrieval.final_cap);
        retrieval.planning_cap = r.value("planning_cap", retrieval.planning_cap);
        retrieval.include_planning_in_prompt =
            r.value("include_planning_in_prompt", retrieval.include_planning_in_prompt);
    }
    if (doc.contains("expansion")) {
        const json& e = doc["expansion"];
        expansion.failure_rate_threshold =
            e.value("failure_rate_threshold", expansion.failure_rate_threshold);
        expansion.max_targets = e.value("max_targets", expansion.max_targets);
        expansion.temperature = e.value("temperature", expansion.temperature);
        expansion.rollouts_per_task = e.value("rollouts_per_task", expansion.rollouts_per_task);
    }

    seed = doc.value("seed", seed);
    jobs = doc.value("jobs", jobs);
}

void PipelineConfig::validate() const {
    auto require = [](bool ok, const std::string& message) {
        if (!ok) throw FormatError("config: " + message);
    };
    require(embedding_dimension > 0, "embedding_dimension must be positive");
    require(retry_attempts >= 1, "retry_attempts must be >= 1");
    require(rollouts_per_task >= 1, "rollouts_per_task must be >= 1");
    require(extraction_temperature >= 0.0 && extraction_temperature <= 2.0,
            "extraction_temperature out of [0, 2]");
    require(step_cap >= 1, "step_cap must be >= 1");

    require(refinement.cluster_sim_threshold > 0.0 && refinement.cluster_sim_threshold <= 1.0,
            "cluster_sim_threshold out of (0, 1]");
    require(refinement.cluster_cap >= 1, "cluster_cap must be >= 1");
    require(refinement.max_iterations >= 0, "max_iterations must be >= 0");
    require(refinement.min_cluster_points >= 1, "min_cluster_points must be >= 1");

    require(retrieval.broad_k >= 1, "broad_k must be >= 1");
    require(retrieval.min_similarity > 0.0, "min_similarity must be positive");
    require(retrieval.min_similarity < retrieval.dedup_threshold,
            "min_similarity must be below dedup_threshold");
    require(retrieval.dedup_threshold <= 1.0, "dedup_threshold out of (min_similarity, 1]");
    require(retrieval.best_match_band >= 0.0, "best_match_band must be non-negative");
    require(retrieval.mmr_lambda >= 0.0 && retrieval.mmr_lambda <= 1.0,
            "mmr_lambda out of [0, 1]");
    require(retrieval.final_cap >= 1, "final_cap must be >= 1");
    require(retrieval.planning_cap >= 1, "planning_cap must be >= 1");

    require(expansion.failure_rate_threshold >= 0.0 && expansion.failure_rate_threshold <= 1.0,
            "failure_rate_threshold out of [0, 1]");
    require(expansion.max_targets >= 1, "max_targets must be >= 1");
    require(expansion.temperature >= 0.0 && expansion.temperature <= 2.0,
            "expansion temperature out of [0, 2]");
    require(expansion.rollouts_per_task >= 1, "expansion rollouts_per_task must be >= 1");

    require(jobs >= 1, "jobs must be >= 1");
}

json PipelineConfig::to_json() const {
    return json{
        {"library", library_path},
        {"schemas", schemas_path},
        {"tasks", tasks_path},
        {"fixture", fixture_path},
        {"templates", templates_dir},
        {"mock_table", mock_table_path},
        {"out", out_dir},
        {"embedding_dimension", embedding_dimension},
        {"retry_attempts", retry_attempts},
        {"retry_backoff_ms", retry_backoff_ms},
        {"chat_model", chat_model},
        {"embed_model", embed_model},
        {"rollouts_per_task", rollouts_per_task},
        {"extraction_temperature", extraction_temperature},
        {"step_cap", step_cap},
        {"refinement",
         {{"cluster_sim_threshold", refinement.cluster_sim_threshold},
          {"cluster_cap", refinement.cluster_cap},
          {"max_iterations", refinement.max_iterations},
          {"min_cluster_points", refinement.min_cluster_points}}},
        {"retrieval",
         {{"broad_k", retrieval.broad_k},
          {"min_similarity", retrieval.min_similarity},
          {"best_match_band", retrieval.best_match_band},
          {"dedup_threshold", retrieval.dedup_threshold},
          {"mmr_lambda", retrieval.mmr_lambda},
          {"final_cap", retrieval.final_cap},
          {"planning_cap", retrieval.planning_cap},
          {"include_planning_in_prompt", retrieval.include_planning_in_prompt}}},
        {"expansion",
         {{"failure_rate_threshold", expansion.failure_rate_threshold},
          {"max_targets", expansion.max_targets},
          {"temperature", expansion.temperature},
          {"rollouts_per_task", expansion.rollouts_per_task}}},
        {"seed", seed},
        {"jobs", jobs}};
}

}  // namespace skillx
