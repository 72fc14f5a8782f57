#pragma once

// Command-line front end.  All commands read a JSON state file and write
// JSON (or CSV for scans) to --output or stdout.  Exit codes:
//   0  success
//   2  input fails validation (unphysical, malformed invariants, unsupported
//      domain such as standard-form with C != 0)
//   3  internal consistency failure (engine cross-checks disagree)
//   4  I/O or parse errors (missing file, bad JSON, bad flag values)

#include <iosfwd>
#include <string>
#include <vector>

namespace ncwit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitConsistency = 3;
inline constexpr int kExitIo = 4;

// Runs the CLI on `args` (excluding argv[0]); writes results to `out`,
// diagnostics to `err`.  Never throws: all errors become exit codes.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace ncwit
