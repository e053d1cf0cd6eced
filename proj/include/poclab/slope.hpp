#pragma once

#include <utility>
#include <vector>

namespace poclab {

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    // 95% confidence half-width of the slope (Student t, n - 2 dof).
    double half_width = 0.0;
    int points = 0;
};

// Ordinary least squares on (log x, log y). Non-finite or non-positive points
// are skipped; throws std::invalid_argument if fewer than 4 remain.
SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

}  // namespace poclab
