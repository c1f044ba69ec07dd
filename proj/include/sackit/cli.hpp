#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sackit::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2 };

/// Runs one command line. `args` excludes the program name. Data goes to
/// `out` (or to files), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace sackit::cli
