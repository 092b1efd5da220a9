#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fcmer {

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs the command line (arguments after the program name).
/// Returns 0 on success, 1 on data or runtime errors, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fcmer
