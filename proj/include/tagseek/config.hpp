#pragma once

#include "tagseek/harness.hpp"

#include <filesystem>
#include <string>

namespace tagseek {

/// Everything a `run`/`sweep` invocation needs: harness settings plus the
/// files that make up the environment.
struct ExperimentConfig {
    RunConfig run;
    std::filesystem::path corpus;
    std::filesystem::path embeddings;
    std::filesystem::path scorer;
    std::filesystem::path out = "out";
    std::string remote;

    /// Pretty-printed JSON accepted back by parse_experiment_config.
    std::string to_json() const;
};

/// Relative paths resolve against `base_dir`. Unknown keys are rejected.
ExperimentConfig parse_experiment_config(const std::string& json_text, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Loads corpus, embeddings and scorer. A score-carrying corpus without a
/// scorer file gets a table-lookup scorer over its stored scores.
Environment load_environment(const ExperimentConfig& config);

} // namespace tagseek
