#pragma once

#include <iosfwd>

namespace p3o {

// Runs the command line front end. Exit codes: 0 success, 1 validation or
// other domain failure, 2 I/O, format or usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace p3o
