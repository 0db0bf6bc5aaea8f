#pragma once

#include <iosfwd>

namespace histmap::cli {

/// Runs the histmap command line. Returns the process exit code: 0 on
/// success, 1 on validation or runtime failure, 2 on usage errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace histmap::cli
