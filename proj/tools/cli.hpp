#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace skillspace::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitModuleError = 1;
inline constexpr int kExitUsage = 2;

// Runs one command line (without the program name). Tables and reports go to
// `out`, the resolved configuration and diagnostics to `err`. Failures print
// a single "error: <Kind>: <message>" line.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace skillspace::cli
