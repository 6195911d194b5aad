#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace zsuc {

// Runs the command-line tool. Exit codes: 0 success, 1 usage error, 2 data
// error, 3 numeric failure.
int run_cli(const std::vector<std::string>& args, std::istream& in,
            std::ostream& out, std::ostream& err);

}  // namespace zsuc
