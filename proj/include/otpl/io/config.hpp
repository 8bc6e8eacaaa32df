#pragma once

#include <map>
#include <string>
#include <vector>

#include "otpl/simulator/pipeline.hpp"

namespace otpl {

/// Everything needed to reproduce a run. The scene seed is the run seed.
struct RunConfig {
  SceneSpec scene;
  NoiseSpec noise;
  PipelineConfig pipeline;

  /// Throws ConfigError naming the section on any violated invariant.
  void validate() const;
};

/// Prefix of environment overrides: OTPL_OT__EPSILON=0.1 sets ot.epsilon.
inline constexpr const char* kEnvPrefix = "OTPL_";

/// Dotted key names in serialization order.
std::vector<std::string> config_keys();

/// Sets one key from its text value. Throws ConfigError for unknown keys or
/// unparsable values, naming the key.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& cfg, const std::string& key);

/// Applies "key = value" lines on top of `cfg`. Blank lines and text after
/// '#' are ignored. Errors name the key and line number.
void apply_config_text(RunConfig& cfg, const std::string& text);

/// Applies every variable that starts with kEnvPrefix; unknown names are rejected.
void apply_env_overrides(RunConfig& cfg, const std::map<std::string, std::string>& env);

/// Environment variables of the current process that start with kEnvPrefix.
std::map<std::string, std::string> otpl_environment();

/// Fully resolved config, one "key = value" line per key, reloadable by
/// apply_config_text.
std::string to_config_text(const RunConfig& cfg);

}  // namespace otpl
