#pragma once

#include <string>
#include <vector>

namespace cforge {

// Entry point behind the collapse-forge binary. Exit codes: 0 success,
// 1 verification failure or Lucas-pass abort, 2 usage or I/O error.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace cforge
