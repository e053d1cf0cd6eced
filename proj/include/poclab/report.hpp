#pragma once

#include <string>
#include <vector>

namespace poclab {

// Outcome of checking one inequality lhs <= rhs.
struct VerificationReport {
    std::string lemma;
    std::string inputs;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool pass = false;
    std::string note;
};

inline constexpr double kDefaultSlackTolerance = 1e-9;

// pass iff rhs - lhs >= -tolerance * max(1, |rhs|).
VerificationReport make_report(std::string lemma, std::string inputs, double lhs, double rhs,
                               double tolerance = kDefaultSlackTolerance);

bool all_pass(const std::vector<VerificationReport>& reports);

// Compact "key=value" rendering of numeric inputs with %.17g values.
std::string digest(std::initializer_list<std::pair<const char*, double>> fields);

}  // namespace poclab
