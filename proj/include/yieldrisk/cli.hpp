#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace yieldrisk {

/// Runs the command line with `args` excluding the program name. Returns
/// 0 on success, 1 on numerical failure and 2 on bad input; failures print
/// one line of error JSON to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace yieldrisk
