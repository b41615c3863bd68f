#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tbm::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kIoError = 3,
  kUnknownAlgorithm = 4,
  kDegenerate = 5,
};

/// Entry point of the `tbm` tool. `args` excludes the program name.
int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tbm::cli
