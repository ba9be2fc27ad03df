#pragma once

#include <iostream>

namespace eqdesign::cli {

enum ExitCode : int { ok = 0, failure = 1, invalid = 2, numerical = 3 };

/// Entry point of the `eqdesign` command. Subcommands: moments, solve,
/// cubature, christoffel, verify {pell|boundary|kkt|pstar|weakstar}.
/// Returns 0 on success, 2 on invalid input, 3 on numerical failure.
int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace eqdesign::cli
