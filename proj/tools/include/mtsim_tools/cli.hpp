#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mtsim::tools {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitConfigError = 2,
  kExitContractViolation = 3,
};

/// Entry point of the `mtsim` tool; `args` excludes the program name.
/// Subcommands: gen, run, bench, verify, sweep. `--config file.json` supplies
/// options as a JSON object ({"command": "run", "trials": 5, ...}); options
/// given on the command line override scalar values from the file.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mtsim::tools
