#pragma once

#include "poclab/model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <variant>
#include <vector>

namespace poclab {

// (diag * I_k + ones * J_k) (x) I_d, with J_k the all-ones k x k matrix.
struct ExchangeableCovariance {
    int blocks = 1;
    int dim = 1;
    double diag = 1.0;
    double ones = 0.0;

    // Eigenvalue on span(1_k) (x) R^d, multiplicity dim.
    double eigen_parallel() const { return diag + ones * blocks; }
    // Eigenvalue on the complement, multiplicity dim * (blocks - 1).
    double eigen_orthogonal() const { return diag; }
};

struct ScaledIdentityCovariance {
    int size = 1;
    double scale = 1.0;
};

// Mean vector plus a symmetric positive definite covariance kept in the
// cheapest exact representation available.
class GaussianSpec {
  public:
    using Covariance = std::variant<Eigen::MatrixXd, ScaledIdentityCovariance, ExchangeableCovariance>;

    static GaussianSpec dense(Eigen::VectorXd mean, Eigen::MatrixXd covariance);
    static GaussianSpec centered(Eigen::MatrixXd covariance);
    static GaussianSpec scaled_identity(int size, double scale);
    static GaussianSpec exchangeable(int blocks, int dim, double diag, double ones);
    static GaussianSpec with_mean(Eigen::VectorXd mean, const GaussianSpec& shape);

    int dim() const { return static_cast<int>(mean_.size()); }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Covariance& covariance() const { return covariance_; }
    bool is_centered() const { return mean_.isZero(0.0); }
    bool is_structured() const { return !std::holds_alternative<Eigen::MatrixXd>(covariance_); }

    Eigen::MatrixXd dense_covariance() const;
    Eigen::MatrixXd dense_precision() const;
    // Covariance eigenvalues with multiplicity, ascending.
    Eigen::VectorXd covariance_eigenvalues() const;
    double max_eigenvalue() const;

  private:
    GaussianSpec(Eigen::VectorXd mean, Covariance covariance);

    Eigen::VectorXd mean_;
    Covariance covariance_;
};

// Precision (a I_N - b J_N) (x) I_d of the finite-particle Gibbs measure in the
// quadratic model. J includes its diagonal, so the matrix has diagonal a - b
// and off-diagonal -b.
struct ExchangeableGaussian {
    int N = 2;
    int d = 1;
    double a = 1.0;
    double b = 0.0;

    // On span(1_N) (x) R^d, multiplicity d.
    double precision_eigen_parallel() const { return a - b * N; }
    // On the complement, multiplicity d (N - 1).
    double precision_eigen_orthogonal() const { return a; }

    Eigen::MatrixXd dense_precision() const;
    Eigen::MatrixXd dense_covariance() const;
};

// Renyi order q > 1, or the q -> 1 limit (relative entropy).
class RenyiOrder {
  public:
    RenyiOrder(double q);  // NOLINT: implicit so plain doubles read naturally
    static RenyiOrder kl_limit();

    bool is_kl_limit() const { return kl_limit_; }
    double q() const;

  private:
    RenyiOrder() = default;
    double q_ = 1.0;
    bool kl_limit_ = true;
};

// A divergence value that may be +infinity in a structured way.
class Divergence {
  public:
    static Divergence finite(double value);
    static Divergence divergent();

    bool is_divergent() const { return divergent_; }
    // Throws DivergentError when divergent.
    double value() const;
    double value_or(double fallback) const { return divergent_ ? fallback : value_; }

  private:
    Divergence(double value, bool divergent) : value_(value), divergent_(divergent) {}
    double value_ = 0.0;
    bool divergent_ = false;
};

// Joint eigenvalues of two commuting covariances: (sigma1_i, sigma2_i) pairs
// with their common multiplicity.
struct SpectralPair {
    double first;
    double second;
    int multiplicity;
};

// Present when both covariances are structured over the same block layout.
std::optional<std::vector<SpectralPair>> joint_spectrum(const GaussianSpec& mu, const GaussianSpec& nu);

ExchangeableGaussian stationary_exchangeable_gaussian(const ModelParams& model);

// Law of the first k particles.
GaussianSpec marginal_covariance(const ExchangeableGaussian& g, int k);

// Law of particles k+1..k+ell given the first k (rows of `observed`).
GaussianSpec conditional_block_gaussian(const ExchangeableGaussian& g, int k, const Eigen::MatrixXd& observed,
                                        int ell);

// Mean-field minimizer N(0, I_d / (alpha_V0 + lambda)) for quadratic models.
GaussianSpec mean_field_gaussian(const ModelParams& model);
// k-fold product of the mean-field minimizer.
GaussianSpec mean_field_product(const ModelParams& model, int k);

Divergence renyi_gaussian(const GaussianSpec& mu, const GaussianSpec& nu, RenyiOrder q);
double kl_gaussian(const GaussianSpec& mu, const GaussianSpec& nu);
double w2_bures(const GaussianSpec& mu, const GaussianSpec& nu);

// Normalized rho^q nu for rho = dmu/dnu; throws DivergentError when the tilt
// precision is not positive definite.
GaussianSpec tilted_gaussian(const GaussianSpec& mu, const GaussianSpec& nu, double q);

struct FisherFunctionals {
    double fisher;
    double renyi_fisher;
};
FisherFunctionals fisher_functionals(const GaussianSpec& mu, const GaussianSpec& nu, double q);

// Sufficient particle count: the q-Renyi of the k-marginal is finite for N > result.
double renyi_existence_threshold(double lambda, int k, double q);

// Leading coefficient of N^2 * R_q(mu^{[k]} || pi^{(x)k}) as N -> infinity.
double asymptotic_coefficient(double lambda, int k, double q, int d);

// Exact LSI constant of a Gaussian: largest covariance eigenvalue.
double gaussian_lsi_constant(const GaussianSpec& g);

}  // namespace poclab
