#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ntnpos/scenarios.hpp"

namespace ntnpos {

/// Strict JSON schema: unknown keys are rejected, omitted keys take the per-variant defaults, and
/// angles are in degrees. Throws ConfigError with the dotted field path.
ScenarioConfig parseConfig(const nlohmann::json& doc);
ScenarioConfig parseConfigText(std::string_view text);
ScenarioConfig parseConfigFile(const std::filesystem::path& path);

/// Fully resolved configuration in the input schema; parseConfig(toJson(c)) reproduces c.
nlohmann::json toJson(const ScenarioConfig& config);

/// SHA-256 of the canonical (sorted-key, compact) serialization of the resolved configuration.
std::string configHash(const ScenarioConfig& config);

}  // namespace ntnpos
