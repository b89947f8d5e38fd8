#pragma once

// Task execution behind the CLI. Exit codes:
//   0  completed with verdicts
//   2  validation or configuration hard failure
//   3  mathematically inconclusive verdict without an override
//   4  internal numeric failure

#include <string>
#include <vector>

#include "svol/config.hpp"

namespace svol::cli {

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> artifacts;   // files written
  std::string summary;                  // one-line outcome for the terminal
};

RunResult run(const RunConfig& cfg);
RunResult run_file(const std::string& config_path,
                   const std::vector<std::string>& overrides);

}  // namespace svol::cli
