#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spdelab/experiments.hpp"

namespace spdelab {

// Sectioned key-value configuration:
//
//   [model]
//   theta0 = 1.0
//   [grid]
//   sweep = [[20, 10000, 5.0], [40, 16000, 10.0]]   # (N, M, T)
//
// Values are numbers, quoted strings, booleans, or (nested) arrays.
struct ConfigValue {
  using Array = std::vector<ConfigValue>;
  std::variant<double, std::string, bool, Array> data;
  std::size_t line = 0;
};

struct ConfigDocument {
  // section -> key -> value
  std::map<std::string, std::map<std::string, ConfigValue>> sections;
};

ConfigDocument parse_config_text(const std::string& text, const std::string& source = "<config>");

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::filesystem::path> output_dir;
  std::optional<ExperimentKind> kind;
};

inline constexpr const char* kOutputDirEnv = "SPDELAB_OUTPUT_DIR";

struct CliConfig {
  ExperimentConfig experiment;
  // Replication index used by single-shot simulate/estimate.
  std::uint64_t replication = 0;
  std::vector<std::string> warnings;
};

// Strict: unknown sections or keys are rejected with their key path.
CliConfig parse_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});
CliConfig parse_config_string(const std::string& text, const ConfigOverrides& overrides = {},
                              const std::string& source = "<config>");

}  // namespace spdelab
