#pragma once

#include <iosfwd>

namespace ilsbm::cli {

// Entry point of the `ilsbm` tool. Returns the process exit status: 0 when no
// error was reported, nonzero otherwise. Progress goes to `out`, diagnostics
// to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ilsbm::cli
