#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace satmm {

// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitOrderingViolated = 1,
  kExitInvalidInput = 2,
  kExitAuditFailed = 3,
  kExitOracleMismatch = 4,
};

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace satmm
