#pragma once

// Seeded randomized checks of the integral inequalities against quadrature.

#include <cstdint>
#include <string>
#include <vector>

namespace delaycert {

struct PropertyStats {
    std::string name;
    int trials = 0;
    int violations = 0;
    int errors = 0;                  ///< trials that threw
    double worst_slack = 0.0;        ///< smallest normalised slack seen
    std::vector<std::string> notes;  ///< first few failures
};

struct PropertySuiteReport {
    std::uint64_t seed = 0;
    int count = 0;
    double tolerance = 0.0;
    std::vector<PropertyStats> properties;

    [[nodiscard]] int total_failures() const;
};

/// Runs `count` draws for each of: the generic four-function inequality, the
/// exponentially weighted bound, its unweighted limit, and both double-integral
/// bounds. Slack is (lhs - rhs) / (1 + |lhs|) and must be >= -tolerance.
PropertySuiteReport run_inequality_properties(std::uint64_t seed, int count, double tolerance = 1e-8);

} // namespace delaycert
