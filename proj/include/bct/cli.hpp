#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bct::cli {

enum ExitCode : int {
  kOk = 0,
  kDomainError = 1,
  kBudgetExhausted = 2,
  kVerificationFailed = 3,
};

/// Runs one `bct` invocation. `args` excludes the program name. Reports go
/// to `out`; failures are written to `err` as a single-line JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bct::cli
