#pragma once

#include <string>
#include <vector>

namespace sldp::cli {

/// Entry point behind the sldp binary; returns the process exit code
/// (0 success, 1 solver/runtime error, 2 malformed input).
int run(const std::vector<std::string>& args);

}  // namespace sldp::cli
