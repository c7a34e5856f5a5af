#pragma once

// JSON encoding of the run configuration. The same canonical encoding feeds
// the config fingerprint, so the fingerprint is recomputable from any echo of
// the configs (e.g. a run manifest).

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "supplyscan/sensor_model.hpp"
#include "supplyscan/sweep_harness.hpp"

namespace supplyscan {

nlohmann::json to_json(const SensorConfig& config);
nlohmann::json to_json(const SweepConfig& config);

/// Missing keys keep their defaults; unknown keys and wrongly typed values throw
/// Error(ConfigParse). The result is validated.
SensorConfig sensor_config_from_json(const nlohmann::json& j);
SweepConfig sweep_config_from_json(const nlohmann::json& j);

/// Compact, key-sorted encoding of both configs.
std::string canonical_config_text(const SensorConfig& sensor, const SweepConfig& sweep);

/// Lower-case hex SHA-256 of canonical_config_text().
std::string config_fingerprint(const SensorConfig& sensor, const SweepConfig& sweep);

std::string sha256_hex(std::string_view bytes);

struct RunConfigFile {
  SensorConfig sensor;
  SweepConfig sweep;
  std::optional<std::filesystem::path> output_dir;
};

RunConfigFile parse_run_config(std::string_view text);
RunConfigFile load_run_config(const std::filesystem::path& path);

}  // namespace supplyscan
