#pragma once

#include <string>
#include <vector>

namespace parobst {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;   // measured values against their pinned bounds
};

/// Runs the built-in acceptance criteria 1-12 (all of them when `which` is
/// empty). Output is deterministic for a given build and PAROBST_SEED.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& which = {});

/// One line: "criterion  3  PASS  <name>: <detail>".
std::string format_result(const CriterionResult& r);

inline constexpr int kCriterionCount = 12;

}  // namespace parobst
