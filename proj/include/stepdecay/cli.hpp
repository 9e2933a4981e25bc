#pragma once

#include <iosfwd>

namespace stepdecay {

/// Exit codes: 0 success, 1 runtime failure, 2 bad arguments or config,
/// 3 a run diverged.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2, kExitDiverged = 3 };

/// Entry point of the stepdecay-lab binary; testable without a process.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stepdecay
