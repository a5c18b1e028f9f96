#pragma once

#include <iosfwd>

namespace ttp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitMissingInput = 2;
inline constexpr int kExitInvalid = 3;
inline constexpr int kExitDiverged = 4;

// Entry point of the `ttp` tool. Reports go to out, diagnostics to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ttp::cli
