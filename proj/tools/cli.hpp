#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hmmep::cli {

/// Runs one command line (without the program name). Returns the process exit
/// code: 0 success, 1 usage, 2 data or validation, 3 numerical, 4 budget.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hmmep::cli
