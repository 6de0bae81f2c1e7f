#pragma once

#include <iosfwd>

namespace invqre::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInternalError = 1;
inline constexpr int kInputError = 2;
inline constexpr int kNotConverged = 3;

/// Parses argv, dispatches the subcommand and writes the artifact to --out (or
/// `out` when absent). Errors go to `err` as "error:<kind>: message".
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace invqre::cli
