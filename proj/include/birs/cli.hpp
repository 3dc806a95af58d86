#pragma once

#include <string>
#include <vector>

namespace birs::cli {

/// Parses and executes one command line (subcommands: detect, simulate,
/// calibrate, bench). Returns the process exit code: 0 on success, 2 on
/// input errors, 3 on configuration errors.
int run(const std::vector<std::string>& args);

int run(int argc, char** argv);

}  // namespace birs::cli
