#pragma once

// Command-line front end. `run_cli` parses argv, dispatches the subcommand and
// returns the process exit status; module errors are reported as JSON on
// stderr and mapped to exit codes 2 (config), 3 (data) or 4 (numerical).

#include <iosfwd>

namespace magspring {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace magspring
