#pragma once

#include <string>
#include <vector>

namespace mlq {

struct SelftestResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Deterministic fixtures with hand-checkable answers, one result per fixture.
std::vector<SelftestResult> run_selftest();

}  // namespace mlq
