#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "blockgnn/error.h"

namespace blockgnn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

int ExitCodeFor(ErrorCategory category);

// Runs the command line `args` (without the program name). Machine-readable
// output goes to `out` unless --out redirects it; progress and error
// summaries go to `err`. Returns the process exit code.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace blockgnn::cli
