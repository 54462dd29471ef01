#pragma once
#include <string>

#include <json.hpp>

namespace pm::cli {

// Output of one command: the CSV artifact (may be empty for analyze) and a
// key-value report block.
struct CommandResult {
  std::string csv;
  std::string report;
};

// Schema-validates the config (unknown keys rejected) and runs the command.
// Throws pm::Error; ConfigError means exit code 2, anything else 3.
CommandResult run_command(const nlohmann::json& config);

nlohmann::json load_config_file(const std::string& path);

}  // namespace pm::cli
