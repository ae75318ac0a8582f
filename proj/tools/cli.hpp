#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qf::cli {

/// Runs one invocation; `args` excludes the program name. Exit codes:
/// 0 success, 1 domain error, 2 usage, I/O or format error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace qf::cli
