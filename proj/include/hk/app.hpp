#pragma once

// Subcommand pipelines behind the `hk` executable.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hk {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,         // verification failed or I/O error
  kExitNonConvergence = 2,
  kExitConfigError = 3,
};

struct AppOptions {
  std::string subcommand;
  std::string config_path;
  std::optional<std::string> out_dir;  // overrides output_dir of the config
  std::optional<int> threads;          // overrides threads of the config
};

std::vector<std::string> subcommands();

/// Runs one subcommand; progress goes to `log`, errors to `err`.
int run_app(const AppOptions& opts, std::ostream& log, std::ostream& err);

}  // namespace hk
