#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace icsim {

struct CriterionResult {
    int id;
    std::string name;
    bool passed;
    std::string detail;
    double seconds;
};

struct AcceptanceOptions {
    std::vector<int> only; // empty: run all 13
    int threads = 0;
};

// Runs the acceptance criteria, printing one pass/fail line per criterion to
// `log` as it goes, and returns the detailed results.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            std::ostream& log);

} // namespace icsim
