#pragma once

#include <iosfwd>

namespace seisnoise {

inline constexpr int kExitOk = 0;
inline constexpr int kExitArgument = 1;
inline constexpr int kExitComputation = 2;

/// The seisnoise command line: characterize, fetch, simulate, batch.
/// Returns 0 on success, 1 on argument errors, 2 on computation errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace seisnoise
