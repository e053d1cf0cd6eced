#include "poclab/divergence.hpp"

#include "poclab/errors.hpp"
#include "poclab/rng.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace poclab {

namespace {

GaussianSpec fit_from_moments(Eigen::VectorXd mean, Eigen::MatrixXd cov, const char* what)
{
    cov = 0.5 * (cov + cov.transpose());
    try {
        return GaussianSpec::dense(std::move(mean), std::move(cov));
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument(std::string(what) + ": degenerate sample covariance");
    }
}

void require_rows(const Eigen::MatrixXd& samples, const char* what)
{
    if (samples.cols() < 1) throw std::invalid_argument(std::string(what) + ": empty dimension");
    if (samples.rows() <= samples.cols())
        throw std::invalid_argument(std::string(what) + ": need more samples than dimensions");
    if (!samples.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite sample");
}

}  // namespace

GaussianSpec gaussian_fit(const Eigen::MatrixXd& samples)
{
    require_rows(samples, "gaussian_fit");
    const double n = static_cast<double>(samples.rows());
    Eigen::VectorXd mean = samples.colwise().mean().transpose();
    const Eigen::MatrixXd centered = samples.rowwise() - mean.transpose();
    return fit_from_moments(std::move(mean), centered.transpose() * centered / n, "gaussian_fit");
}

GaussianSpec gaussian_fit_centered(const Eigen::MatrixXd& samples)
{
    require_rows(samples, "gaussian_fit_centered");
    const double n = static_cast<double>(samples.rows());
    return fit_from_moments(Eigen::VectorXd::Zero(samples.cols()), samples.transpose() * samples / n,
                            "gaussian_fit_centered");
}

DivergenceEstimate plugin_renyi_estimate(const Eigen::MatrixXd& mu_samples, const GaussianSpec& reference, double q,
                                         std::uint64_t seed, int resamples)
{
    if (!(q > 1.0)) throw std::invalid_argument("plugin_renyi_estimate: q must be > 1");
    if (mu_samples.cols() != reference.dim())
        throw std::invalid_argument("plugin_renyi_estimate: sample dimension does not match reference");
    if (resamples < 2) throw std::invalid_argument("plugin_renyi_estimate: need at least 2 bootstrap resamples");

    DivergenceEstimate est;
    est.samples = mu_samples.rows();
    est.bootstrap_resamples = resamples;
    est.value = renyi_gaussian(gaussian_fit_centered(mu_samples), reference, q);

    const Eigen::Index n = mu_samples.rows();
    const Eigen::Index m = mu_samples.cols();
    CounterRng rng(seed, 0x626f6f74ull);  // "boot"
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(resamples));
    int divergent = 0;
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = mu_samples;
    Eigen::MatrixXd second(m, m);
    for (int b = 0; b < resamples; ++b) {
        second.setZero();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double* x = rows.data() + static_cast<std::ptrdiff_t>(rng.below(static_cast<std::uint64_t>(n))) * m;
            for (Eigen::Index c = 0; c < m; ++c)
                for (Eigen::Index r = c; r < m; ++r) second(r, c) += x[r] * x[c];
        }
        const Eigen::MatrixXd full = Eigen::MatrixXd(second.selfadjointView<Eigen::Lower>()) / static_cast<double>(n);
        Divergence d = Divergence::divergent();
        try {
            d = renyi_gaussian(GaussianSpec::centered(full), reference, q);
        } catch (const std::invalid_argument&) {
            // degenerate resample counts as divergent
        }
        if (d.is_divergent())
            ++divergent;
        else
            values.push_back(d.value());
    }
    est.divergent_fraction = static_cast<double>(divergent) / resamples;
    if (values.size() >= 2) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        est.std_error = std::sqrt(ss / static_cast<double>(values.size() - 1));
    } else {
        est.std_error = std::numeric_limits<double>::infinity();
    }
    return est;
}

double w2_empirical_1d(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw std::invalid_argument("w2_empirical_1d: sample counts differ");
    if (a.empty()) throw std::invalid_argument("w2_empirical_1d: empty samples");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) ss += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(ss / static_cast<double>(x.size()));
}

double gaussian_norm_tail(int d, double variance, double r)
{
    if (d < 1 || !(variance > 0.0)) throw std::invalid_argument("gaussian_norm_tail: need d >= 1, variance > 0");
    if (r <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * d, 0.5 * r * r / variance);
}

std::vector<VerificationReport> change_of_measure_report(const ModelParams& model, int k, double q,
                                                         const std::vector<double>& radii, double heuristic)
{
    if (!model.is_quadratic()) throw std::invalid_argument("change_of_measure_report: quadratic models only");
    if (!(q > 1.0)) throw std::invalid_argument("change_of_measure_report: q must be > 1");
    const ExchangeableGaussian g = stationary_exchangeable_gaussian(model);
    const GaussianSpec marginal = marginal_covariance(g, k);
    const GaussianSpec product = mean_field_product(model, k);
    const Divergence renyi = renyi_gaussian(marginal, product, q);
    if (renyi.is_divergent())
        throw DivergentError("change_of_measure_report: Renyi divergence is infinite at N=" + std::to_string(model.N));

    // First particle of the k-marginal: N(0, (u + v) I_d); reference N(0, I_d / (alpha + lambda)).
    const auto& shape = std::get<ExchangeableCovariance>(marginal.covariance());
    const double var_mu = shape.diag + shape.ones;
    const double var_pi = 1.0 / (model.alpha_V0 + model.lambda);
    const double exponent = (q - 1.0) / q * renyi.value();
    const bool below = model.N < heuristic * std::sqrt(static_cast<double>(model.d)) * std::pow(k, 1.5);

    std::vector<VerificationReport> out;
    out.reserve(2 * radii.size());
    for (double r : radii) {
        const double p_mu = gaussian_norm_tail(model.d, var_mu, r);
        const double p_pi = gaussian_norm_tail(model.d, var_pi, r);
        const std::string inputs = digest({{"lambda", model.lambda},
                                           {"N", static_cast<double>(model.N)},
                                           {"d", static_cast<double>(model.d)},
                                           {"k", static_cast<double>(k)},
                                           {"q", q},
                                           {"r", r}});
        auto lemma = make_report("change-of-measure", inputs, p_mu, std::pow(p_pi, 1.0 - 1.0 / q) * std::exp(exponent));
        auto corollary = make_report("change-of-measure-corollary", inputs, p_mu, 2.0 * std::sqrt(p_pi));
        if (below) {
            lemma.note = "below-heuristic-N";
            corollary.note = "below-heuristic-N";
        }
        out.push_back(std::move(lemma));
        out.push_back(std::move(corollary));
    }
    return out;
}

}  // namespace poclab
