#pragma once

#include "poclab/gaussian.hpp"
#include "poclab/model.hpp"
#include "poclab/report.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace poclab {

enum class LsiMethod { OttoReznikoff, HolleyStroock, GaussianExact };

struct LsiCertificate {
    // Certified C_LSI; empty when the interaction matrix is not positive definite.
    std::optional<double> constant;
    double zeta = 0.0;
    LsiMethod method = LsiMethod::OttoReznikoff;

    bool certified() const { return constant.has_value(); }
};

// A with A_ii = tau_i and A_ij = -beta_ij; certifies C_LSI = 1 / lambda_min(A).
LsiCertificate otto_reznikoff_certificate(const Eigen::VectorXd& tau, const Eigen::MatrixXd& beta);

// exp(osc_V1 + osc_W1) / (alpha_V0 + N/(N-1) min(alpha_W0, 0)).
double holley_stroock_bound(double alpha_V0, double alpha_W0, double osc_V1, double osc_W1, int N);

// R_q(mu || nu) <= q C / 2 * RFI_q(mu || nu) with C the exact LSI constant of nu.
VerificationReport renyi_lsi_check(const GaussianSpec& mu, const GaussianSpec& nu, double q);

// KL(P || mu) <= (q - 1) C / 2 * RFI_q(mu || nu) for the tilted measure P, q >= 2.
VerificationReport tilt_kl_check(const GaussianSpec& mu, const GaussianSpec& nu, double q);

// Linear test function with gradient norm L under N(0, c_lsi): for each grid
// value t checks log E exp(t (G - EG)) <= t^2 L^2 c / 2 and
// log E exp(t (G - EG)^2) <= 2 t L^2 c. The squared form is only reported for
// t L^2 c <= 1/4. The Monte-Carlo estimate of each left side is in `note`.
std::vector<VerificationReport> subgaussian_mgf_check(double L, double c_lsi, const std::vector<double>& grid,
                                                      long mc_samples, std::uint64_t seed = 0);

struct RecursionTrace {
    double xi = 0.0;
    // coefficients[l - 1] = l / (l + xi) for l = 1 .. N - k.
    std::vector<double> coefficients;
    // products[l - 1] = prod_{l' <= l} coefficients.
    std::vector<double> products;
    // Bound on K_{N-k}.
    double terminal = 0.0;
    // K_1 obtained by unrolling the hierarchy from the terminal bound.
    double k1_unrolled = 0.0;
    // c_N k |Delta|^2 / (2 C) with the solved c_N.
    double k1_bound = 0.0;
    // c_N with every coefficient product replaced by its closed-form bound.
    double k1_closed_bound = 0.0;
    bool meets_weak_interaction = false;
    std::vector<VerificationReport> reports;
};

// Coefficient products of the conditional-KL hierarchy and their closed-form
// bound for all 1 <= i <= j <= N - k.
RecursionTrace recursion_chain(double beta_W, double c_lsi_bar, int N, int k, double delta_sq,
                               double xi_min = 2.0, double tolerance = 1e-12);

struct LipschitzProbe {
    double L_exact = 0.0;
    // L_exact (N - 1 + lambda k) / (lambda sqrt k); NaN when lambda = 0.
    double normalized = 0.0;
    VerificationReport report;
};

// Operator norm of x^[k] -> E[x^{k+1} | x^[k]] in the quadratic model.
LipschitzProbe conditional_lipschitz_probe(const ModelParams& model, int k);

struct PocProbe {
    std::vector<int> N_grid;
    std::vector<double> fisher;
    std::vector<double> kl;
    std::optional<double> fisher_slope;
    std::optional<double> kl_slope;
    // KL k-exponent at the largest grid N, when k_grid was supplied.
    std::optional<double> k_exponent;
};

// Exact FI and KL of the k-marginal against the product mean field over N_grid.
PocProbe fisher_poc_probe(const ModelParams& model, int k, const std::vector<int>& N_grid,
                          const std::vector<int>& k_grid = {});

}  // namespace poclab
