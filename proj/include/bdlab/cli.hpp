#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bdlab/json_io.hpp"

namespace bdlab::cli {

/// Exit codes: 0 every asserted property held, 1 a property was falsified
/// (or a replay differed), 2 usage, scale or input error.
enum ExitCode : int { kOk = 0, kFalsified = 1, kUsage = 2 };

/// Parses `args` (without the program name), runs one experiment and
/// writes the report to --out or `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs the experiment and returns its report without writing it.  Help
/// text goes to `out` and yields a null report.
json_io::Json execute(const std::vector<std::string>& args, int& exit_code, std::ostream& out, std::ostream& err);

}  // namespace bdlab::cli
