#pragma once

#include <string>
#include <vector>

namespace seqbench::cli {

/// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run_cli(int argc, char** argv);
/// Same, with args[0] taken as the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace seqbench::cli
