#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace transposit {

struct CheckResult {
    std::string suite;
    std::string name;
    bool passed = false;
    double value = 0.0;      ///< worst observed error (or the checked quantity)
    double tolerance = 0.0;
    std::string detail;
};

struct SuiteOptions {
    int states = 50;
    std::uint64_t seed = 7;
    bool parallel = true;
};

const std::vector<std::string>& suite_ids();

/// Throws InvalidArgument on an unknown id.
std::vector<CheckResult> run_suite(const std::string& id, const SuiteOptions& opt = {});

}  // namespace transposit
