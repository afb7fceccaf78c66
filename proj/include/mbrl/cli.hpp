#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mbrl {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCertificate = 1;
inline constexpr int kExitInput = 2;

/// Runs `mbrl_lab <args...>` (args excludes the program name). Reports go to
/// --out when given, otherwise to `out`; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mbrl
