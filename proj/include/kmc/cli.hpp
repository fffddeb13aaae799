#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kmc {

/// Runs the command line `args` (without the program name). Data goes to
/// `out`, diagnostics to `err`. Returns the process exit code: 0 on success,
/// 1 on runtime errors, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Expands `--config FILE` into flags. The file holds key=value lines (# comments);
/// keys already given on the command line are skipped.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace kmc
