#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "valarena/arena.hpp"

namespace valarena {

// Reads a file into a string; throws ValidationError when unreadable.
std::string read_text_file(const std::string& path);

// Loads, normalizes, and validates an experiment. Relative game paths
// resolve against the config file's directory. The VALARENA_SEED environment
// variable, when set, overrides the configured base seed.
ExperimentConfig load_experiment_config(const std::string& path);

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::string& base_dir);

// Effective config echo: defaults materialized, stable key order. Feeding
// the echo back through experiment_config_from_json yields the same config.
nlohmann::ordered_json experiment_config_to_json(const ExperimentConfig& cfg);

nlohmann::ordered_json report_to_json(const ExperimentReport& report, const ExperimentConfig& cfg);

nlohmann::ordered_json snapshots_to_json(const std::vector<LearnerSnapshot>& snapshots);

}  // namespace valarena
