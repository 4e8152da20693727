#pragma once

#include <string>
#include <vector>

namespace rankforge::cli {

/// Entry point behind the rankforge binary: subcommands generate, rank,
/// train, eval, report. Returns the process exit code (0 on success).
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace rankforge::cli
