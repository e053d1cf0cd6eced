#include "poclab/errors.hpp"
#include "poclab/particle_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace poclab {

namespace {

double trapezoid(const std::vector<double>& f, double dx)
{
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * dx;
}

struct Moments {
    double mean;
    double variance;
};

Moments moments(const std::vector<double>& grid, const std::vector<double>& density, double dx)
{
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) f[i] = grid[i] * density[i];
    const double m = trapezoid(f, dx);
    for (std::size_t i = 0; i < grid.size(); ++i) f[i] = (grid[i] - m) * (grid[i] - m) * density[i];
    return {m, trapezoid(f, dx)};
}

// exp(-V(x) - (W * rho)(x)) normalized. For W = lambda/2 |.|^2 the convolution
// is lambda/2 (x^2 - 2 m x) plus a constant, so only the mean of rho enters.
std::vector<double> apply_map(const ModelParams& model, const std::vector<double>& grid, double mean_in, double dx)
{
    std::vector<double> log_f(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i];
        log_f[i] = -model.confinement({&x, 1}) - 0.5 * model.lambda * (x * x - 2.0 * mean_in * x);
    }
    const double peak = *std::max_element(log_f.begin(), log_f.end());
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) f[i] = std::exp(log_f[i] - peak);
    const double z = trapezoid(f, dx);
    if (!(z > 0.0) || !std::isfinite(z)) throw ConvergenceError("mean_field_fixed_point: non-integrable candidate");
    for (double& v : f) v /= z;
    return f;
}

}  // namespace

MeanFieldSolution mean_field_fixed_point(const ModelParams& model, double damping, double tol, int max_iter,
                                         int grid_points)
{
    model.validate();
    if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("mean_field_fixed_point: damping in (0, 1]");
    if (!(tol > 0.0)) throw std::invalid_argument("mean_field_fixed_point: tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("mean_field_fixed_point: max_iter must be >= 1");

    MeanFieldSolution sol;
    if (model.is_quadratic()) {
        sol.gaussian = mean_field_gaussian(model);
        sol.variance = 1.0 / (model.alpha_V0 + model.lambda);
        return sol;
    }
    if (model.d != 1) throw std::invalid_argument("mean_field_fixed_point: perturbed models are solved in d = 1 only");
    if (grid_points < 3) throw std::invalid_argument("mean_field_fixed_point: grid_points must be >= 3");

    const double sigma = 1.0 / std::sqrt(model.alpha_V0 + model.lambda);
    const double lo = -8.0 * sigma;
    const double dx = 16.0 * sigma / (grid_points - 1);
    sol.grid.resize(static_cast<std::size_t>(grid_points));
    for (int i = 0; i < grid_points; ++i) sol.grid[static_cast<std::size_t>(i)] = lo + i * dx;

    // Start from the unperturbed mean-field Gaussian.
    sol.density.resize(sol.grid.size());
    for (std::size_t i = 0; i < sol.grid.size(); ++i) {
        const double z = sol.grid[i] / sigma;
        sol.density[i] = std::exp(-0.5 * z * z);
    }
    const double z0 = trapezoid(sol.density, dx);
    for (double& v : sol.density) v /= z0;

    for (int it = 1; it <= max_iter; ++it) {
        const Moments m = moments(sol.grid, sol.density, dx);
        const std::vector<double> image = apply_map(model, sol.grid, m.mean, dx);
        double change = 0.0;
        for (std::size_t i = 0; i < image.size(); ++i) {
            const double next = (1.0 - damping) * sol.density[i] + damping * image[i];
            change = std::max(change, std::abs(next - sol.density[i]));
            sol.density[i] = next;
        }
        sol.iterations = it;
        sol.last_change = change;
        if (change <= tol) {
            const Moments final_moments = moments(sol.grid, sol.density, dx);
            sol.mean = final_moments.mean;
            sol.variance = final_moments.variance;
            return sol;
        }
    }
    throw ConvergenceError("mean_field_fixed_point: no convergence after " + std::to_string(max_iter) +
                           " iterations (last sup-norm change " + std::to_string(sol.last_change) + ")");
}

}  // namespace poclab
