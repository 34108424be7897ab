#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace clustreg::cli {

/// Process exit codes.
enum ExitCode : int {
  ok = 0,
  usage = 1,       // bad flags, unreadable or malformed input
  numerical = 2,   // every start failed, singular components, non-finite values
  degenerate = 3,  // only degenerate (spurious) fits were found; output still written
  output_io = 4,   // the result could not be written
};

/// Runs one invocation. `args` excludes the program name. Diagnostics go to
/// `err`, one record per line prefixed "error:" or "warn:".
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clustreg::cli
