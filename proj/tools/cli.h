#pragma once

#include <ostream>

namespace dipca::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitNotMaximum = 3;

// Entry point behind the `dipca` binary: fit, extract, check, gen, bench.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dipca::cli
