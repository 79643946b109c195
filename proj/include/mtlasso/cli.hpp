#pragma once

#include <iosfwd>

namespace mtlasso::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNumeric = 2 };

/// Runs one subcommand: fit, interaction, ci, ellipsoid, test-row, simulate.
/// Human-readable progress goes to out; failures are reported on err as a
/// single JSON object. Returns the process exit code.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mtlasso::cli
