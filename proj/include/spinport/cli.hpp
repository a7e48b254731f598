// Command-line front end, exposed as a library function so tests can drive
// it directly. Exit codes: 0 success, 1 validation mismatch, 2 usage or
// input error, 3 internal error.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spinport::cli {

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spinport::cli
