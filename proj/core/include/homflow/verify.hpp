#pragma once

#include "homflow/zoo.hpp"

namespace homflow {

struct CheckResult {
    std::string name;
    bool ok = false;
    double value = 0.0;      // observed quantity
    double threshold = 0.0;  // what it was compared against
};

struct SuiteResult {
    std::string suite;
    std::vector<CheckResult> checks;
    int failures() const;
    bool ok() const { return failures() == 0; }
};

const std::vector<std::string>& suite_names();  // homogeneity dissipation rayleigh bounds opflow all

/// Runs one invariant battery over the built-in problem zoo. Unknown suite
/// names throw std::invalid_argument.
SuiteResult run_suite(const std::string& name, unsigned seed = 20240601u);

}  // namespace homflow
