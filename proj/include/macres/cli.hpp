#pragma once

#include <iosfwd>

namespace macres {

// Parses argv and runs one subcommand. Machine-readable output (one JSON
// object per line, or CSV) goes to `out` unless --out is given; the human
// summary goes to `err`. Returns 0 on success, 1 on validation errors and
// 2 on budget or runtime errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace macres
