#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace treemst::cli {

/// Runs one command line (args excludes the program name).
/// Returns 0 on success, 2 on usage errors and 1 on runtime or parse errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace treemst::cli
