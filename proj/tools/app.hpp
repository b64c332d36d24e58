#pragma once

#include <string>
#include <vector>

namespace bohmctx::cli {

/// Whole command line: parses, runs, writes. Returns the process exit code
/// (0 success, 1 bad input or usage, 2 numerical or output failure).
int run_cli(const std::vector<std::string>& args);

}  // namespace bohmctx::cli
