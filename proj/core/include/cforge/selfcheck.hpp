#pragma once

#include <string>
#include <vector>

namespace cforge {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Re-derives the library's number-theoretic claims from scratch (naive
// 64-bit reference implementations, brute-force scans) and compares. This
// is what `collapse-forge verify` runs. Several seconds of work.
std::vector<CheckResult> run_selfchecks();

}  // namespace cforge
