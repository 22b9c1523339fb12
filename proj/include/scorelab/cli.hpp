#pragma once

namespace scorelab {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes are distinct per failure class so scripts can branch on them.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;         // unexpected internal failure
inline constexpr int kExitConfig = 2;        // bad flags, config, or inputs
inline constexpr int kExitDivergence = 3;    // non-finite or runaway numerics
inline constexpr int kExitCheckFailure = 4;  // oracle battery reported a failure

// Full command-line driver: parses argv, dispatches to a subcommand, maps
// exceptions to exit codes, and writes a manifest next to the outputs.
int run_cli(int argc, char** argv);

}  // namespace scorelab
