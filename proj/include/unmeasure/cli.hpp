#pragma once

#include <iosfwd>

namespace unmeasure::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsageError = 2;

/// Runs one subcommand. Artifacts go to --out when given, otherwise to `out`;
/// errors are written to `err` as a JSON object.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Library version stamped into JSON outputs.
const char* version();

}  // namespace unmeasure::cli
