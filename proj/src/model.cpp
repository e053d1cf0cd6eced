#include "poclab/model.hpp"

#include "poclab/gaussian.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace poclab {

namespace {

double argument(const CosinePerturbation& p, std::span<const double> x)
{
    double s = 0.0;
    for (double v : x) s += v;
    return p.frequency * s / std::sqrt(static_cast<double>(x.size())) + p.phase;
}

}  // namespace

double CosinePerturbation::value(std::span<const double> x) const
{
    return amplitude * std::cos(argument(*this, x));
}

void CosinePerturbation::accumulate_gradient(std::span<const double> x, std::span<double> out) const
{
    const double g = -amplitude * std::sin(argument(*this, x)) * frequency / std::sqrt(static_cast<double>(x.size()));
    for (double& o : out) o += g;
}

double CosinePerturbation::oscillation() const { return 2.0 * std::abs(amplitude); }

double CosinePerturbation::hessian_bound() const { return std::abs(amplitude) * frequency * frequency; }

ModelParams ModelParams::quadratic(int d, int N, double lambda)
{
    ModelParams m;
    m.d = d;
    m.N = N;
    m.lambda = lambda;
    m.alpha_W0 = lambda;
    m.beta_W = lambda;
    m.validate();
    return m;
}

ModelParams ModelParams::perturbed(int d, int N, double lambda, CosinePerturbation p)
{
    ModelParams m = quadratic(d, N, lambda);
    m.osc_V1 = p.oscillation();
    m.perturbation = p;
    m.validate();
    return m;
}

void ModelParams::validate() const
{
    if (d < 1) throw std::invalid_argument("model: d must be >= 1");
    if (N < 2) throw std::invalid_argument("model: N must be >= 2");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("model: lambda must be finite and >= 0");
    if (!(beta_W >= 0.0)) throw std::invalid_argument("model: beta_W must be >= 0");
    if (!(osc_V1 >= 0.0) || !(osc_W1 >= 0.0)) throw std::invalid_argument("model: oscillations must be >= 0");
    if (!(alpha_V0 + std::min(alpha_W0, 0.0) > 0.0))
        throw std::invalid_argument("model: alpha_V0 + min(alpha_W0, 0) must be > 0");
    if (perturbation) {
        if (!std::isfinite(perturbation->amplitude) || !std::isfinite(perturbation->frequency) ||
            !std::isfinite(perturbation->phase))
            throw std::invalid_argument("model: perturbation parameters must be finite");
        if (osc_V1 + 1e-15 < perturbation->oscillation())
            throw std::invalid_argument("model: osc_V1 smaller than the perturbation's oscillation");
    }
}

bool ModelParams::is_quadratic() const
{
    return !perturbation.has_value() && osc_V1 == 0.0 && osc_W1 == 0.0;
}

double ModelParams::confinement(std::span<const double> x) const
{
    double sq = 0.0;
    for (double v : x) sq += v * v;
    double v = 0.5 * alpha_V0 * sq;
    if (perturbation) v += perturbation->value(x);
    return v;
}

void ModelParams::accumulate_confinement_gradient(std::span<const double> x, std::span<double> out) const
{
    for (std::size_t c = 0; c < x.size(); ++c) out[c] += alpha_V0 * x[c];
    if (perturbation) perturbation->accumulate_gradient(x, out);
}

double ModelParams::interaction(std::span<const double> z) const
{
    double sq = 0.0;
    for (double v : z) sq += v * v;
    return 0.5 * lambda * sq;
}

void ModelParams::accumulate_interaction_gradient(std::span<const double> z, double scale,
                                                  std::span<double> out) const
{
    for (std::size_t c = 0; c < z.size(); ++c) out[c] += scale * lambda * z[c];
}

ParticleConfiguration::ParticleConfiguration(const ModelParams& model, Positions positions)
    : model_(model), positions_(std::move(positions))
{
    if (positions_.rows() != model.N || positions_.cols() != model.d)
        throw std::invalid_argument("configuration: expected " + std::to_string(model.N) + " x " +
                                    std::to_string(model.d) + " positions");
    if (!positions_.allFinite()) throw std::invalid_argument("configuration: non-finite position");
}

std::span<const double> ParticleConfiguration::particle(int i) const
{
    return {positions_.data() + static_cast<std::ptrdiff_t>(i) * positions_.cols(),
            static_cast<std::size_t>(positions_.cols())};
}

Eigen::VectorXd pairwise_drift(const ParticleConfiguration& config, int i)
{
    const ModelParams& m = config.model();
    if (i < 0 || i >= m.N) throw std::out_of_range("pairwise_drift: particle index out of range");
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(m.d);
    std::span<double> g(grad.data(), grad.size());
    const auto xi = config.particle(i);
    m.accumulate_confinement_gradient(xi, g);
    Eigen::VectorXd diff(m.d);
    const double scale = 1.0 / (m.N - 1);
    for (int j = 0; j < m.N; ++j) {
        if (j == i) continue;
        const auto xj = config.particle(j);
        for (int c = 0; c < m.d; ++c) diff[c] = xi[c] - xj[c];
        m.accumulate_interaction_gradient({diff.data(), static_cast<std::size_t>(m.d)}, scale, g);
    }
    return -grad;
}

double confinement_energy(const ParticleConfiguration& config)
{
    const ModelParams& m = config.model();
    double e = 0.0;
    for (int i = 0; i < m.N; ++i) e += m.confinement(config.particle(i));
    return e;
}

double interaction_energy(const ParticleConfiguration& config)
{
    const ModelParams& m = config.model();
    Eigen::VectorXd diff(m.d);
    double e = 0.0;
    for (int i = 0; i < m.N; ++i) {
        const auto xi = config.particle(i);
        for (int j = 0; j < m.N; ++j) {
            if (j == i) continue;
            const auto xj = config.particle(j);
            for (int c = 0; c < m.d; ++c) diff[c] = xi[c] - xj[c];
            e += m.interaction({diff.data(), static_cast<std::size_t>(m.d)});
        }
    }
    return e / (2.0 * (m.N - 1));
}

double finite_particle_energy(const ParticleConfiguration& config)
{
    return confinement_energy(config) + interaction_energy(config);
}

double energy_and_gradient(const ModelParams& m, std::span<const double> x, std::span<double> grad)
{
    const int N = m.N;
    const int d = m.d;
    Eigen::Map<const Positions> X(x.data(), N, d);
    Eigen::Map<Positions> G(grad.data(), N, d);
    const Eigen::RowVectorXd sum = X.colwise().sum();
    const double sq = X.squaredNorm();

    // sum_{i != j} |x^i - x^j|^2 = 2 N sum_i |x^i|^2 - 2 |sum_i x^i|^2
    const double pair_sq = 2.0 * N * sq - 2.0 * sum.squaredNorm();
    double energy = 0.5 * m.alpha_V0 * sq + m.lambda * pair_sq / (4.0 * (N - 1));

    const double c = m.lambda / (N - 1);
    G = (m.alpha_V0 + c * N) * X;
    G.rowwise() -= c * sum;
    if (m.perturbation) {
        for (int i = 0; i < N; ++i) {
            std::span<const double> xi(x.data() + static_cast<std::ptrdiff_t>(i) * d, static_cast<std::size_t>(d));
            energy += m.perturbation->value(xi);
            m.perturbation->accumulate_gradient(xi, {grad.data() + static_cast<std::ptrdiff_t>(i) * d,
                                                     static_cast<std::size_t>(d)});
        }
    }
    return energy;
}

double mean_field_residual(const GaussianSpec& candidate, const ModelParams& model)
{
    if (!model.is_quadratic()) throw std::invalid_argument("mean_field_residual: quadratic models only");
    if (candidate.dim() != model.d) throw std::invalid_argument("mean_field_residual: dimension mismatch");
    // W * candidate = lambda/2 (|x - m|^2 + tr S), so the image has precision
    // (alpha + lambda) I and linear coefficient lambda m.
    const Eigen::MatrixXd precision = candidate.dense_precision();
    const Eigen::VectorXd& m = candidate.mean();
    const Eigen::MatrixXd target = (model.alpha_V0 + model.lambda) * Eigen::MatrixXd::Identity(model.d, model.d);
    const double gap_precision = (precision - target).squaredNorm();
    const double gap_shift = (precision * m - model.lambda * m).squaredNorm();
    return std::sqrt(gap_precision + gap_shift);
}

}  // namespace poclab
