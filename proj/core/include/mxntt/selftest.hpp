#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mxntt {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail; // measured values on pass, first failing check on fail
};

struct AcceptanceReport {
    std::vector<CriterionResult> criteria;
    bool all_passed = false;
};

// Runs the full acceptance battery with fixed seeds. Writes one PASS/FAIL
// line per criterion to `out` when given.
AcceptanceReport run_acceptance(std::ostream* out = nullptr);

} // namespace mxntt
