#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lear::cli {

/// Exit codes outside the per-error-class range.
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInternal = 1;

/// Runs the command line (args excludes the program name). Reports go to
/// `out`; on failure a one-line JSON error record goes to `out` and the
/// human-readable message to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lear::cli
