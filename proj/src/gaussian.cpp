#include "poclab/gaussian.hpp"

#include "poclab/errors.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <limits>
#include <iostream>
#include <stdexcept>
#include <string>

namespace poclab {

namespace {

constexpr double kPdThreshold = 1e-12;
constexpr double kKlRedirect = 1e-6;

void require_pd(const Eigen::VectorXd& eig, const char* what)
{
    const double hi = eig.maxCoeff();
    const double lo = eig.minCoeff();
    if (!(hi > 0.0) || !(lo > kPdThreshold * hi) || !eig.allFinite())
        throw std::invalid_argument(std::string(what) + ": covariance is not positive definite");
}

void require_same_dim(const GaussianSpec& mu, const GaussianSpec& nu, const char* what)
{
    if (mu.dim() != nu.dim())
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(mu.dim()) +
                                    " vs " + std::to_string(nu.dim()) + ")");
}

void require_centered(const GaussianSpec& mu, const GaussianSpec& nu, const char* what)
{
    if (!mu.is_centered() || !nu.is_centered())
        throw std::invalid_argument(std::string(what) + ": only centered Gaussians are supported");
}

// Positivity of a set of tilt eigenvalues under the relative threshold.
bool tilt_positive(const Eigen::VectorXd& t)
{
    const double scale = t.cwiseAbs().maxCoeff();
    return t.allFinite() && t.minCoeff() > kPdThreshold * scale;
}

std::optional<ExchangeableCovariance> as_exchangeable(const GaussianSpec& g, int blocks, int dim)
{
    if (const auto* e = std::get_if<ExchangeableCovariance>(&g.covariance())) {
        if (e->blocks == blocks && e->dim == dim) return *e;
        return std::nullopt;
    }
    if (const auto* s = std::get_if<ScaledIdentityCovariance>(&g.covariance())) {
        if (s->size == blocks * dim) return ExchangeableCovariance{blocks, dim, s->scale, 0.0};
    }
    return std::nullopt;
}

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// Eigenvalues of the tilt precision q inv(S1) + (1 - q) inv(S2), with multiplicity.
Eigen::VectorXd tilt_eigenvalues(const std::vector<SpectralPair>& pairs, double q)
{
    Eigen::VectorXd t(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) t[i] = q / pairs[i].first + (1.0 - q) / pairs[i].second;
    return t;
}

// Centered divergences depend only on the relative eigenvalues r of S1 w.r.t. S2.
// Per unit multiplicity, with e = r - 1:
//   2 (q - 1) R_q = (1 - q) log1p(e) - log1p((1 - q) e)
//   2 KL          = e - log1p(e)
double renyi_term(double e, double q) { return (1.0 - q) * std::log1p(e) - std::log1p((1.0 - q) * e); }
double kl_term(double e) { return e - std::log1p(e); }

Eigen::VectorXd relative_eigenvalues_dense(const GaussianSpec& mu, const GaussianSpec& nu)
{
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(mu.dense_covariance(), nu.dense_covariance(),
                                                                   Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    return ges.eigenvalues();
}

}  // namespace

// GaussianSpec ---------------------------------------------------------------

GaussianSpec::GaussianSpec(Eigen::VectorXd mean, Covariance covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance))
{
    if (!mean_.allFinite()) throw std::invalid_argument("gaussian: non-finite mean");
    if (const auto* m = std::get_if<Eigen::MatrixXd>(&covariance_)) {
        if (m->rows() != m->cols() || m->rows() != mean_.size())
            throw std::invalid_argument("gaussian: covariance shape does not match mean");
        if (!m->allFinite()) throw std::invalid_argument("gaussian: non-finite covariance");
        const double asym = (*m - m->transpose()).cwiseAbs().maxCoeff();
        if (asym > 1e-10 * std::max(1.0, m->cwiseAbs().maxCoeff()))
            throw std::invalid_argument("gaussian: covariance is not symmetric");
    }
    if (mean_.size() == 0) throw std::invalid_argument("gaussian: empty dimension");
    require_pd(covariance_eigenvalues(), "gaussian");
}

GaussianSpec GaussianSpec::dense(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
{
    return GaussianSpec(std::move(mean), Covariance(std::move(covariance)));
}

GaussianSpec GaussianSpec::centered(Eigen::MatrixXd covariance)
{
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(covariance.rows());
    return dense(std::move(mean), std::move(covariance));
}

GaussianSpec GaussianSpec::scaled_identity(int size, double scale)
{
    if (size < 1) throw std::invalid_argument("gaussian: size must be >= 1");
    return GaussianSpec(Eigen::VectorXd::Zero(size), Covariance(ScaledIdentityCovariance{size, scale}));
}

GaussianSpec GaussianSpec::exchangeable(int blocks, int dim, double diag, double ones)
{
    if (blocks < 1 || dim < 1) throw std::invalid_argument("gaussian: blocks and dim must be >= 1");
    return GaussianSpec(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(blocks) * dim),
                        Covariance(ExchangeableCovariance{blocks, dim, diag, ones}));
}

GaussianSpec GaussianSpec::with_mean(Eigen::VectorXd mean, const GaussianSpec& shape)
{
    if (mean.size() != shape.dim()) throw std::invalid_argument("gaussian: mean size does not match covariance");
    return GaussianSpec(std::move(mean), shape.covariance_);
}

Eigen::MatrixXd GaussianSpec::dense_covariance() const
{
    if (const auto* m = std::get_if<Eigen::MatrixXd>(&covariance_)) return *m;
    if (const auto* s = std::get_if<ScaledIdentityCovariance>(&covariance_))
        return s->scale * Eigen::MatrixXd::Identity(s->size, s->size);
    const auto& e = std::get<ExchangeableCovariance>(covariance_);
    const Eigen::MatrixXd block =
        e.diag * Eigen::MatrixXd::Identity(e.blocks, e.blocks) + e.ones * Eigen::MatrixXd::Ones(e.blocks, e.blocks);
    return Eigen::kroneckerProduct(block, Eigen::MatrixXd::Identity(e.dim, e.dim));
}

Eigen::MatrixXd GaussianSpec::dense_precision() const
{
    if (const auto* m = std::get_if<Eigen::MatrixXd>(&covariance_)) return m->inverse();
    if (const auto* s = std::get_if<ScaledIdentityCovariance>(&covariance_))
        return Eigen::MatrixXd::Identity(s->size, s->size) / s->scale;
    const auto& e = std::get<ExchangeableCovariance>(covariance_);
    // inv(u I + v J) = (I - v / (u + v k) J) / u
    const double u = e.diag;
    const double w = -e.ones / (u * e.eigen_parallel());
    const Eigen::MatrixXd block =
        Eigen::MatrixXd::Identity(e.blocks, e.blocks) / u + w * Eigen::MatrixXd::Ones(e.blocks, e.blocks);
    return Eigen::kroneckerProduct(block, Eigen::MatrixXd::Identity(e.dim, e.dim));
}

Eigen::VectorXd GaussianSpec::covariance_eigenvalues() const
{
    if (const auto* m = std::get_if<Eigen::MatrixXd>(&covariance_)) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*m, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }
    if (const auto* s = std::get_if<ScaledIdentityCovariance>(&covariance_))
        return Eigen::VectorXd::Constant(s->size, s->scale);
    const auto& e = std::get<ExchangeableCovariance>(covariance_);
    Eigen::VectorXd ev(static_cast<Eigen::Index>(e.blocks) * e.dim);
    ev.head(e.dim).setConstant(e.eigen_parallel());
    ev.tail(ev.size() - e.dim).setConstant(e.eigen_orthogonal());
    std::sort(ev.data(), ev.data() + ev.size());
    return ev;
}

double GaussianSpec::max_eigenvalue() const { return covariance_eigenvalues().maxCoeff(); }

// ExchangeableGaussian -------------------------------------------------------

Eigen::MatrixXd ExchangeableGaussian::dense_precision() const
{
    const Eigen::MatrixXd block = a * Eigen::MatrixXd::Identity(N, N) - b * Eigen::MatrixXd::Ones(N, N);
    return Eigen::kroneckerProduct(block, Eigen::MatrixXd::Identity(d, d));
}

Eigen::MatrixXd ExchangeableGaussian::dense_covariance() const { return dense_precision().inverse(); }

// RenyiOrder / Divergence ----------------------------------------------------

RenyiOrder::RenyiOrder(double q) : q_(q), kl_limit_(false)
{
    if (!(q > 1.0) || !std::isfinite(q))
        throw std::invalid_argument("renyi order must satisfy q > 1 (got " + std::to_string(q) + ")");
}

RenyiOrder RenyiOrder::kl_limit() { return RenyiOrder(); }

double RenyiOrder::q() const { return kl_limit_ ? 1.0 : q_; }

Divergence Divergence::finite(double value) { return Divergence(value, false); }

Divergence Divergence::divergent() { return Divergence(std::numeric_limits<double>::infinity(), true); }

double Divergence::value() const
{
    if (divergent_) throw DivergentError("divergence is infinite");
    return value_;
}

// Structure ------------------------------------------------------------------

std::optional<std::vector<SpectralPair>> joint_spectrum(const GaussianSpec& mu, const GaussianSpec& nu)
{
    if (mu.dim() != nu.dim() || !mu.is_structured() || !nu.is_structured()) return std::nullopt;
    const auto* s1 = std::get_if<ScaledIdentityCovariance>(&mu.covariance());
    const auto* s2 = std::get_if<ScaledIdentityCovariance>(&nu.covariance());
    if (s1 && s2) return std::vector<SpectralPair>{{s1->scale, s2->scale, s1->size}};

    const auto* e = std::get_if<ExchangeableCovariance>(&mu.covariance());
    if (!e) e = std::get_if<ExchangeableCovariance>(&nu.covariance());
    const auto x = as_exchangeable(mu, e->blocks, e->dim);
    const auto y = as_exchangeable(nu, e->blocks, e->dim);
    if (!x || !y) return std::nullopt;

    std::vector<SpectralPair> pairs{{x->eigen_parallel(), y->eigen_parallel(), e->dim}};
    if (e->blocks > 1) pairs.push_back({x->eigen_orthogonal(), y->eigen_orthogonal(), e->dim * (e->blocks - 1)});
    return pairs;
}

ExchangeableGaussian stationary_exchangeable_gaussian(const ModelParams& model)
{
    model.validate();
    if (!model.is_quadratic())
        throw std::invalid_argument("stationary_exchangeable_gaussian: perturbed model has no Gaussian closed form");
    // alpha I + lambda/(N-1) (N I - J) = (alpha + lambda N/(N-1)) I - lambda/(N-1) J
    const double c = model.lambda / (model.N - 1);
    return {model.N, model.d, model.alpha_V0 + c * model.N, c};
}

GaussianSpec marginal_covariance(const ExchangeableGaussian& g, int k)
{
    if (k < 1 || k > g.N) throw std::out_of_range("marginal_covariance: k must be in [1, N]");
    // inv(a I - b J) = (I + b / (a - b N) J) / a
    const double u = 1.0 / g.a;
    const double v = g.b / (g.a * g.precision_eigen_parallel());
    return GaussianSpec::exchangeable(k, g.d, u, v);
}

GaussianSpec conditional_block_gaussian(const ExchangeableGaussian& g, int k, const Eigen::MatrixXd& observed,
                                        int ell)
{
    if (k < 0 || ell < 1 || k + ell > g.N)
        throw std::out_of_range("conditional_block_gaussian: need k >= 0, ell >= 1, k + ell <= N");
    if (observed.rows() != k || observed.cols() != g.d)
        throw std::invalid_argument("conditional_block_gaussian: observed must be k x d");
    // Remaining precision block is a I - b J on N - k particles; its coupling
    // to the observed block is -b J, so every free particle has mean c * sum(x^[k]).
    const double rest = g.a - g.b * (g.N - k);
    const double c = g.b / rest;
    const Eigen::RowVectorXd total = k > 0 ? Eigen::RowVectorXd(observed.colwise().sum())
                                           : Eigen::RowVectorXd::Zero(g.d);
    Eigen::VectorXd mean(static_cast<Eigen::Index>(ell) * g.d);
    for (int i = 0; i < ell; ++i) mean.segment(static_cast<Eigen::Index>(i) * g.d, g.d) = c * total.transpose();
    const auto shape = GaussianSpec::exchangeable(ell, g.d, 1.0 / g.a, g.b / (g.a * rest));
    return GaussianSpec::with_mean(std::move(mean), shape);
}

GaussianSpec mean_field_gaussian(const ModelParams& model) { return mean_field_product(model, 1); }

GaussianSpec mean_field_product(const ModelParams& model, int k)
{
    model.validate();
    if (!model.is_quadratic()) throw std::invalid_argument("mean_field_gaussian: quadratic models only");
    if (k < 1) throw std::out_of_range("mean_field_product: k must be >= 1");
    return GaussianSpec::scaled_identity(k * model.d, 1.0 / (model.alpha_V0 + model.lambda));
}

// Divergences ----------------------------------------------------------------

Divergence renyi_gaussian(const GaussianSpec& mu, const GaussianSpec& nu, RenyiOrder order)
{
    require_same_dim(mu, nu, "renyi_gaussian");
    require_centered(mu, nu, "renyi_gaussian");
    if (order.is_kl_limit()) return Divergence::finite(kl_gaussian(mu, nu));
    const double q = order.q();
    if (q < 1.0 + kKlRedirect) {
        std::clog << "poclab: renyi order q=" << q << " within " << kKlRedirect
                  << " of 1; using the relative-entropy limit\n";
        return Divergence::finite(kl_gaussian(mu, nu));
    }

    double acc = 0.0;
    if (const auto pairs = joint_spectrum(mu, nu)) {
        if (!tilt_positive(tilt_eigenvalues(*pairs, q))) return Divergence::divergent();
        for (const auto& p : *pairs) acc += p.multiplicity * renyi_term(p.first / p.second - 1.0, q);
    } else {
        const Eigen::MatrixXd tilt = q * mu.dense_precision() + (1.0 - q) * nu.dense_precision();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tilt, Eigen::EigenvaluesOnly);
        if (!tilt_positive(es.eigenvalues())) return Divergence::divergent();
        for (double r : relative_eigenvalues_dense(mu, nu)) acc += renyi_term(r - 1.0, q);
    }
    return Divergence::finite(std::max(0.0, acc / (2.0 * (q - 1.0))));
}

double kl_gaussian(const GaussianSpec& mu, const GaussianSpec& nu)
{
    require_same_dim(mu, nu, "kl_gaussian");
    require_centered(mu, nu, "kl_gaussian");
    double acc = 0.0;
    if (const auto pairs = joint_spectrum(mu, nu)) {
        for (const auto& p : *pairs) acc += p.multiplicity * kl_term(p.first / p.second - 1.0);
    } else {
        for (double r : relative_eigenvalues_dense(mu, nu)) acc += kl_term(r - 1.0);
    }
    return std::max(0.0, 0.5 * acc);
}

double w2_bures(const GaussianSpec& mu, const GaussianSpec& nu)
{
    require_same_dim(mu, nu, "w2_bures");
    const double mean_sq = (mu.mean() - nu.mean()).squaredNorm();
    double cov_part = 0.0;
    if (const auto pairs = joint_spectrum(mu, nu)) {
        for (const auto& p : *pairs) {
            const double diff = std::sqrt(p.first) - std::sqrt(p.second);
            cov_part += p.multiplicity * diff * diff;
        }
    } else {
        const Eigen::MatrixXd s1 = mu.dense_covariance();
        const Eigen::MatrixXd s2 = nu.dense_covariance();
        const Eigen::MatrixXd root2 = sym_sqrt(s2);
        const Eigen::MatrixXd cross = sym_sqrt(root2 * s1 * root2);
        cov_part = std::max(0.0, (s1 + s2 - 2.0 * cross).trace());
    }
    return std::sqrt(mean_sq + cov_part);
}

GaussianSpec tilted_gaussian(const GaussianSpec& mu, const GaussianSpec& nu, double q)
{
    require_same_dim(mu, nu, "tilted_gaussian");
    require_centered(mu, nu, "tilted_gaussian");
    if (!(q >= 1.0)) throw std::invalid_argument("tilted_gaussian: q must be >= 1");
    if (q == 1.0) return mu;

    if (const auto pairs = joint_spectrum(mu, nu)) {
        const Eigen::VectorXd t = tilt_eigenvalues(*pairs, q);
        if (!tilt_positive(t)) throw DivergentError("tilted_gaussian: tilt precision is not positive definite");
        if (std::holds_alternative<ScaledIdentityCovariance>(mu.covariance()) &&
            std::holds_alternative<ScaledIdentityCovariance>(nu.covariance()))
            return GaussianSpec::scaled_identity(mu.dim(), 1.0 / t[0]);
        const auto* e = std::get_if<ExchangeableCovariance>(&mu.covariance());
        if (!e) e = std::get_if<ExchangeableCovariance>(&nu.covariance());
        const double parallel = 1.0 / t[0];
        const double orthogonal = e->blocks > 1 ? 1.0 / t[1] : parallel;
        return GaussianSpec::exchangeable(e->blocks, e->dim, orthogonal, (parallel - orthogonal) / e->blocks);
    }
    const Eigen::MatrixXd tilt = q * mu.dense_precision() + (1.0 - q) * nu.dense_precision();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tilt);
    if (!tilt_positive(es.eigenvalues()))
        throw DivergentError("tilted_gaussian: tilt precision is not positive definite");
    const Eigen::MatrixXd cov =
        es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return GaussianSpec::centered(0.5 * (cov + cov.transpose()));
}

FisherFunctionals fisher_functionals(const GaussianSpec& mu, const GaussianSpec& nu, double q)
{
    require_same_dim(mu, nu, "fisher_functionals");
    require_centered(mu, nu, "fisher_functionals");
    if (!(q >= 1.0)) throw std::invalid_argument("fisher_functionals: q must be >= 1");
    // grad log(dmu/dnu)(x) = -(P1 - P2) x, so both functionals are traces.
    if (const auto pairs = joint_spectrum(mu, nu)) {
        double fi = 0.0;
        for (const auto& p : *pairs) {
            const double g = 1.0 / p.first - 1.0 / p.second;
            fi += p.multiplicity * g * g * p.first;
        }
        if (q == 1.0) return {fi, fi};
        const Eigen::VectorXd t = tilt_eigenvalues(*pairs, q);
        if (!tilt_positive(t)) throw DivergentError("fisher_functionals: tilt precision is not positive definite");
        double rfi = 0.0;
        for (std::size_t i = 0; i < pairs->size(); ++i) {
            const auto& p = (*pairs)[i];
            const double g = 1.0 / p.first - 1.0 / p.second;
            rfi += p.multiplicity * g * g / t[static_cast<Eigen::Index>(i)];
        }
        return {fi, q * rfi};
    }
    const Eigen::MatrixXd gap = mu.dense_precision() - nu.dense_precision();
    const double fi = (gap * mu.dense_covariance() * gap).trace();
    if (q == 1.0) return {fi, fi};
    const GaussianSpec tilted = tilted_gaussian(mu, nu, q);
    return {fi, q * (gap * tilted.dense_covariance() * gap).trace()};
}

double renyi_existence_threshold(double lambda, int k, double q)
{
    if (!(lambda >= 0.0) || k < 1 || !(q > 1.0))
        throw std::invalid_argument("renyi_existence_threshold: need lambda >= 0, k >= 1, q > 1");
    return 1.0 + lambda * k * (q - 1.0) - lambda * q / (1.0 + lambda);
}

double asymptotic_coefficient(double lambda, int k, double q, int d)
{
    if (!(lambda >= 0.0) || !(q > 1.0) || k < 1 || d < 1)
        throw std::invalid_argument("asymptotic_coefficient: need lambda >= 0, q > 1, k >= 1, d >= 1");
    const double s = 1.0 + lambda;
    return d * q * lambda * lambda / (4.0 * s * s) * k * (k * s * s - (2.0 * lambda + 1.0));
}

double gaussian_lsi_constant(const GaussianSpec& g) { return g.max_eigenvalue(); }

}  // namespace poclab
