#pragma once

#include <stdexcept>
#include <string>

namespace sncbf {

// Exit codes used by the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,    // invalid config or CLI arguments
  kExitStage = 3,     // a training or benchmark stage failed
  kExitIo = 4,        // I/O failure
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sncbf
