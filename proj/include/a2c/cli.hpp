#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace a2c {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` excludes the program name. Artifacts go to
/// --out (default: <experiment.out>/<command>), which must not exist unless
/// --force is given.
int execute_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace a2c
