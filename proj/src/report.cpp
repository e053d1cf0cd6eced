#include "poclab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace poclab {

VerificationReport make_report(std::string lemma, std::string inputs, double lhs, double rhs, double tolerance)
{
    VerificationReport r;
    r.lemma = std::move(lemma);
    r.inputs = std::move(inputs);
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = rhs - lhs;
    r.pass = std::isfinite(r.slack) ? r.slack >= -tolerance * std::max(1.0, std::abs(rhs)) : (rhs == INFINITY && lhs < rhs);
    return r;
}

bool all_pass(const std::vector<VerificationReport>& reports)
{
    return std::all_of(reports.begin(), reports.end(), [](const VerificationReport& r) { return r.pass; });
}

std::string digest(std::initializer_list<std::pair<const char*, double>> fields)
{
    std::string out;
    char buf[64];
    for (const auto& [key, value] : fields) {
        if (!out.empty()) out += ';';
        std::snprintf(buf, sizeof buf, "%.17g", value);
        out += key;
        out += '=';
        out += buf;
    }
    return out;
}

}  // namespace poclab
