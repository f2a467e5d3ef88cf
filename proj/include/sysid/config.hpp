#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sysid/harness.hpp"

namespace sysid {

/// Configuration failure with the offending file/field in the message.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json load_json_file(const std::string& path);

/// Applies a dotted-key override "a.b.c=value". The value is parsed as JSON
/// when possible and falls back to a plain string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

ExperimentConfig parse_experiment_config(const nlohmann::json& doc);

/// Expands the "strategies" array into one config per strategy, sharing
/// everything else with the base document.
std::vector<ExperimentConfig> parse_compare_configs(const nlohmann::json& doc);

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

/// Dotted keys recognized by --override, for the CLI help text.
const std::vector<std::string>& known_override_keys();

}  // namespace sysid
