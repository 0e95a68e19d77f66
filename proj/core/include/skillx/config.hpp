#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "skillx/expansion.hpp"
#include "skillx/refinement.hpp"
#include "skillx/retrieval.hpp"

namespace skillx {

/// Whole-pipeline configuration: one committed document plus flag
/// overrides, so a run is reproducible from the config and the seed alone.
struct PipelineConfig {
    // paths
    std::string library_path = "out/library.json";
    std::string schemas_path;
    std::string tasks_path;
    std::string fixture_path;
    std::string templates_dir;
    std::string mock_table_path;  // set: deterministic mock gateways drive everything
    std::string out_dir = "out";

    // gateways
    int embedding_dimension = 1024;
    int retry_attempts = 3;
    int retry_backoff_ms = 100;
    std::string chat_model = "default";
    std::string embed_model = "default";

    // rollout & extraction
    int rollouts_per_task = 4;
    double extraction_temperature = 0.9;
    int step_cap = 40;

    RefinementConfig refinement;
    RetrievalConfig retrieval;
    ExpansionConfig expansion;

    uint64_t seed = 1;
    unsigned jobs = 1;

    static PipelineConfig from_file(const std::string& path);

    /// Overlays the fields present in `doc` onto this config.
    void apply_json(const nlohmann::json& doc);

    /// Range checks every constant; throws FormatError on violations.
    void validate() const;

    nlohmann::json to_json() const;

    std::string trajectory_dir() const { return out_dir + "/trajectories"; }
    std::string snapshot_dir() const { return out_dir + "/snapshots"; }
    std::string report_dir() const { return out_dir + "/reports"; }
};

}  // namespace skillx
