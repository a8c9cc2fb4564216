#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace expsum::acceptance {

struct Options {
    std::uint64_t seed = 20240917u;
    bool quick = false;  // smaller case counts, N <= 3; runs in a few seconds
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;  // worst measured value vs bound
};

/// Run the embedded end-to-end suite: every contract the artifact promises,
/// checked at desk scale with seeded random cases.
std::vector<CriterionResult> run_all(const Options& opts);

}  // namespace expsum::acceptance
