#pragma once

#include <string>

#include <json.hpp>

namespace arefs {

// Runs one named scenario, writing its artifacts plus manifest.json into
// outdir. Returns the manifest. Throws std::invalid_argument on config
// errors (with the offending key path) and std::runtime_error on numerical
// failures.
nlohmann::json run_scenario(const std::string& name, nlohmann::json config,
                            const std::string& outdir);

// schema and cross-field checks only; returns a list of error strings
std::vector<std::string> validate_config(const std::string& name,
                                         const nlohmann::json& config);

const std::vector<std::string>& scenario_names();

}  // namespace arefs
