#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spinbath::cli {

enum ExitCode : int { Success = 0, Usage = 2, NotConverged = 3, Io = 4 };

/// Runs the command line `args` (args[0] is the program name).
int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err);

/// Parses "v1,v2,..." or "start:stop:log|lin[:count]" (count defaults to 50).
[[nodiscard]] std::vector<double> parse_value_list(std::string const& spec);

}  // namespace spinbath::cli
