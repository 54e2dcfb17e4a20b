#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace pbw::cli {

enum ExitCode : int { kAllPass = 0, kCheckFailure = 1, kConfigError = 2 };

/// Runs `pbw <args...>` (args exclude the program name). Environment
/// variables come from `env`; human-readable progress goes to `out`,
/// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, const Environment& env, std::ostream& out, std::ostream& err);

}  // namespace pbw::cli
