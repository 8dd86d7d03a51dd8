#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace logsieve::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInternal = 3;

// Runs one subcommand. argv[0] is the program name. Reports go to `out`
// unless --out names a file; diagnostics and stage timings go to `err`.
int run(const std::vector<std::string>& argv, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace logsieve::cli
