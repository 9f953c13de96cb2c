#pragma once

#include <stdexcept>
#include <string>

namespace cfaudit {

// CLI exit codes. 1 is reserved for unexpected internal failures.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitService = 4,
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ServiceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cfaudit
