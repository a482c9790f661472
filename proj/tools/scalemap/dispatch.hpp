#pragma once

#include "scalemap/config.hpp"

namespace scalemap::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Parses argv and runs one subcommand. Failures are reported on stderr as a
// single line "error: <Code>: <message>".
int run(int argc, const char* const* argv, const EnvLookup& getenv);

}  // namespace scalemap::cli
