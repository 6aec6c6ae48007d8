#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace inflogic::cli {

struct CommandResult {
  bool ok = true;
  nlohmann::json payload = nlohmann::json::object();
  std::vector<std::string> diagnostics;
  int exit_code = 0;  // 0 ok, 1 input or evaluation error, 2 usage error

  /// {"status": "ok"|"error", "payload": ..., "diagnostics": [...]}
  nlohmann::json to_json() const;
};

/// Runs one subcommand. `args` excludes the program name. Never throws for
/// bad input; every failure is reported in the result.
CommandResult run(std::span<const std::string> args);

}  // namespace inflogic::cli
