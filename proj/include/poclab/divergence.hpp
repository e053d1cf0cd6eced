#pragma once

#include "poclab/gaussian.hpp"
#include "poclab/model.hpp"
#include "poclab/report.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace poclab {

enum class EstimateMethod { GaussianPlugin, Quantile1d };

struct DivergenceEstimate {
    Divergence value = Divergence::finite(0.0);
    double std_error = 0.0;
    EstimateMethod method = EstimateMethod::GaussianPlugin;
    long samples = 0;
    int bootstrap_resamples = 0;
    // Share of bootstrap resamples whose fitted pair had no finite divergence.
    double divergent_fraction = 0.0;
};

// Maximum-likelihood mean and covariance of the rows of `samples` (normalized
// by n, not n - 1). Throws when n <= dimension or the covariance is degenerate.
GaussianSpec gaussian_fit(const Eigen::MatrixXd& samples);

// As gaussian_fit with the mean pinned at zero (second-moment matrix).
GaussianSpec gaussian_fit_centered(const Eigen::MatrixXd& samples);

// Fits a centered Gaussian to `mu_samples` (rows) and evaluates the closed-form
// Renyi divergence against `reference`; stderr from a seeded bootstrap.
DivergenceEstimate plugin_renyi_estimate(const Eigen::MatrixXd& mu_samples, const GaussianSpec& reference, double q,
                                         std::uint64_t seed = 0, int resamples = 200);

// Quantile-coupling W2 between two equal-size one-dimensional samples.
double w2_empirical_1d(std::span<const double> a, std::span<const double> b);

// Checks, for each radius r and event A = {|x^1| > r}, the Holder change of
// measure bound and the factor-2 square-root bound on the k-marginal, using
// exact chi-square tails. Reports come in pairs (lemma, corollary) per radius.
// Configurations with N < heuristic * sqrt(d) k^{3/2} are flagged in `note`.
std::vector<VerificationReport> change_of_measure_report(const ModelParams& model, int k, double q,
                                                         const std::vector<double>& radii,
                                                         double heuristic = 1.0);

// P(|X| > r) for X ~ N(0, variance I_d).
double gaussian_norm_tail(int d, double variance, double r);

}  // namespace poclab
