#pragma once

#include <iosfwd>

namespace nfrl::cli {

/// Exit codes shared by every command.
enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kUsageError = 2 };

/// Runs `nfrl <command> [flags]`; argv[0] is the program name.
/// Normal output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace nfrl::cli
