#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ecpo::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kConfigError = 2, kInvariantBreach = 3 };

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ecpo::cli
