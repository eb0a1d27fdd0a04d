#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace minid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand (sample, survival, copula, taildep, verify, describe).
// `args` excludes the program name. Results go to `out`, diagnostics to `err`.
// `self_path` is the executable that `verify` uses for the determinism run.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                const std::string& self_path = {});

}  // namespace minid::cli
