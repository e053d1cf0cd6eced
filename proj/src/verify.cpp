#include "poclab/verify.hpp"

#include "poclab/errors.hpp"
#include "poclab/rng.hpp"
#include "poclab/slope.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace poclab {

LsiCertificate otto_reznikoff_certificate(const Eigen::VectorXd& tau, const Eigen::MatrixXd& beta)
{
    const Eigen::Index n = tau.size();
    if (n < 1 || beta.rows() != n || beta.cols() != n)
        throw std::invalid_argument("otto_reznikoff_certificate: tau and beta sizes differ");
    if ((tau.array() <= 0.0).any()) throw std::invalid_argument("otto_reznikoff_certificate: tau must be > 0");
    if ((beta.array() < 0.0).any()) throw std::invalid_argument("otto_reznikoff_certificate: beta must be >= 0");
    if ((beta - beta.transpose()).cwiseAbs().maxCoeff() > 0.0)
        throw std::invalid_argument("otto_reznikoff_certificate: beta must be symmetric");

    Eigen::MatrixXd A = -beta;
    A.diagonal() = tau;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    LsiCertificate cert;
    cert.zeta = es.eigenvalues().minCoeff();
    if (cert.zeta > 0.0) cert.constant = 1.0 / cert.zeta;
    return cert;
}

double holley_stroock_bound(double alpha_V0, double alpha_W0, double osc_V1, double osc_W1, int N)
{
    if (N < 2) throw std::invalid_argument("holley_stroock_bound: N must be >= 2");
    if (!(osc_V1 >= 0.0) || !(osc_W1 >= 0.0)) throw std::invalid_argument("holley_stroock_bound: oscillations >= 0");
    if (!(alpha_V0 + std::min(alpha_W0, 0.0) > 0.0))
        throw std::invalid_argument("holley_stroock_bound: alpha_V0 + min(alpha_W0, 0) must be > 0");
    const double denom = alpha_V0 + static_cast<double>(N) / (N - 1) * std::min(alpha_W0, 0.0);
    if (!(denom > 0.0)) throw std::invalid_argument("holley_stroock_bound: non-positive denominator");
    return std::exp(osc_V1 + osc_W1) / denom;
}

namespace {

std::string pair_digest(const GaussianSpec& mu, const GaussianSpec& nu, double q)
{
    return digest({{"dim", static_cast<double>(mu.dim())},
                   {"q", q},
                   {"lmax_mu", mu.max_eigenvalue()},
                   {"lmax_nu", nu.max_eigenvalue()}});
}

}  // namespace

VerificationReport renyi_lsi_check(const GaussianSpec& mu, const GaussianSpec& nu, double q)
{
    const Divergence r = renyi_gaussian(mu, nu, q);
    if (r.is_divergent()) throw DivergentError("renyi_lsi_check: Renyi divergence is infinite");
    const double c = gaussian_lsi_constant(nu);
    const FisherFunctionals f = fisher_functionals(mu, nu, q);
    return make_report("renyi-lsi", pair_digest(mu, nu, q), r.value(), 0.5 * q * c * f.renyi_fisher);
}

VerificationReport tilt_kl_check(const GaussianSpec& mu, const GaussianSpec& nu, double q)
{
    if (!(q >= 2.0)) throw std::invalid_argument("tilt_kl_check: requires q >= 2");
    const GaussianSpec tilted = tilted_gaussian(mu, nu, q);
    const double c = gaussian_lsi_constant(nu);
    const FisherFunctionals f = fisher_functionals(mu, nu, q);
    return make_report("tilt-kl", pair_digest(mu, nu, q), kl_gaussian(tilted, mu), 0.5 * (q - 1.0) * c * f.renyi_fisher);
}

std::vector<VerificationReport> subgaussian_mgf_check(double L, double c_lsi, const std::vector<double>& grid,
                                                      long mc_samples, std::uint64_t seed)
{
    if (!(L >= 0.0) || !(c_lsi > 0.0)) throw std::invalid_argument("subgaussian_mgf_check: need L >= 0, c_lsi > 0");
    for (double t : grid)
        if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("subgaussian_mgf_check: grid values must be >= 0");

    // G(x) = L <e, x> under N(0, c I): G - EG ~ N(0, L^2 c).
    const double var = L * L * c_lsi;
    CounterRng rng(seed, 0x6d6766ull);
    std::vector<double> draws(static_cast<std::size_t>(std::max(0L, mc_samples)));
    for (double& z : draws) z = std::sqrt(var) * rng.normal();

    std::vector<VerificationReport> out;
    char note[96];
    for (double t : grid) {
        const std::string inputs = digest({{"L", L}, {"c_lsi", c_lsi}, {"t", t}});
        double mc_linear = NAN;
        double mc_square = NAN;
        // squared form only exists for t L^2 c <= 1/4
        const bool square_ok = t * var <= 0.25;
        if (!draws.empty()) {
            double s1 = 0.0, s2 = 0.0;
            for (double z : draws) {
                s1 += std::exp(t * z);
                if (square_ok) s2 += std::exp(t * z * z);
            }
            mc_linear = std::log(s1 / static_cast<double>(draws.size()));
            mc_square = std::log(s2 / static_cast<double>(draws.size()));
        }
        auto linear = make_report("subgaussian-linear", inputs, 0.5 * t * t * var, 0.5 * t * t * L * L * c_lsi);
        std::snprintf(note, sizeof note, "mc_lhs=%.17g", mc_linear);
        linear.note = note;
        out.push_back(std::move(linear));
        if (!square_ok) continue;
        auto square = make_report("subgaussian-square", inputs, -0.5 * std::log1p(-2.0 * t * var), 2.0 * t * L * L * c_lsi);
        std::snprintf(note, sizeof note, "mc_lhs=%.17g", mc_square);
        square.note = note;
        out.push_back(std::move(square));
    }
    return out;
}

RecursionTrace recursion_chain(double beta_W, double c_lsi_bar, int N, int k, double delta_sq, double xi_min,
                               double tolerance)
{
    if (!(beta_W > 0.0) || !(c_lsi_bar > 0.0)) throw std::invalid_argument("recursion_chain: need beta_W, C > 0");
    if (k < 1 || k >= N) throw std::invalid_argument("recursion_chain: need 1 <= k < N");
    if (!(delta_sq >= 0.0)) throw std::invalid_argument("recursion_chain: delta_sq must be >= 0");

    RecursionTrace tr;
    const double bc2 = beta_W * beta_W * c_lsi_bar * c_lsi_bar;
    tr.xi = 1.0 / (2.0 * bc2);
    tr.meets_weak_interaction = tr.xi >= xi_min;
    const double xi = tr.xi;
    const int top = N - k;

    tr.coefficients.resize(static_cast<std::size_t>(top));
    tr.products.resize(static_cast<std::size_t>(top));
    double running = 1.0;
    for (int l = 1; l <= top; ++l) {
        const double c = 2.0 * l * bc2 / (1.0 + 2.0 * l * bc2);
        tr.coefficients[static_cast<std::size_t>(l - 1)] = c;
        running *= c;
        tr.products[static_cast<std::size_t>(l - 1)] = running;
    }

    // Every product prod_{l=i}^{j} C_l against ((i + xi) / (j + 1 + xi))^xi.
    int failures = 0;
    double worst = INFINITY;
    VerificationReport worst_report;
    for (int i = 1; i <= top; ++i) {
        double prod = 1.0;
        for (int j = i; j <= top; ++j) {
            prod *= tr.coefficients[static_cast<std::size_t>(j - 1)];
            const double bound = std::pow((i + xi) / (j + 1 + xi), xi);
            const double slack = bound - prod;
            if (slack < -tolerance) ++failures;
            if (slack < worst) {
                worst = slack;
                worst_report = make_report("coefficient-product",
                                           digest({{"xi", xi}, {"N", static_cast<double>(N)},
                                                   {"k", static_cast<double>(k)}, {"i", static_cast<double>(i)},
                                                   {"j", static_cast<double>(j)}}),
                                           prod, bound, 0.0);
                worst_report.pass = slack >= -tolerance;
            }
        }
    }
    worst_report.note = "worst of " + std::to_string(static_cast<long>(top) * (top + 1) / 2) + " pairs; failures=" +
                        std::to_string(failures);
    worst_report.pass = failures == 0;
    tr.reports.push_back(worst_report);

    // K_l <= C_l (a + K_{l+1}) with a = k |D|^2 / (2 C N^2), from K_{N-k}.
    const double a = k * delta_sq / (2.0 * c_lsi_bar * N * static_cast<double>(N));
    tr.terminal = beta_W * beta_W * k * c_lsi_bar * delta_sq / (2.0 * N);
    double K = tr.terminal;
    for (int l = top - 1; l >= 1; --l) K = tr.coefficients[static_cast<std::size_t>(l - 1)] * (a + K);
    tr.k1_unrolled = top > 1 ? K : tr.terminal;

    const double scale = k * delta_sq / (2.0 * c_lsi_bar);
    double c_n = 0.0;
    double c_n_closed = 0.0;
    if (top > 1) {
        const double full = tr.products[static_cast<std::size_t>(top - 2)];
        c_n = full / (2.0 * xi * N);
        c_n_closed = std::pow((1.0 + xi) / (top + xi), xi) / (2.0 * xi * N);
        for (int l = 1; l <= top - 1; ++l) {
            c_n += tr.products[static_cast<std::size_t>(l - 1)] / (static_cast<double>(N) * N);
            c_n_closed += std::pow((1.0 + xi) / (l + 1 + xi), xi) / (static_cast<double>(N) * N);
        }
    } else {
        c_n = c_n_closed = 1.0 / (2.0 * xi * N);
    }
    tr.k1_bound = c_n * scale;
    tr.k1_closed_bound = c_n_closed * scale;

    const std::string inputs = digest({{"beta_W", beta_W}, {"C", c_lsi_bar}, {"N", static_cast<double>(N)},
                                       {"k", static_cast<double>(k)}, {"delta_sq", delta_sq}});
    tr.reports.push_back(make_report("recursion-k1", inputs, tr.k1_unrolled, tr.k1_bound));
    tr.reports.push_back(make_report("recursion-k1-closed", inputs, tr.k1_bound, tr.k1_closed_bound));
    // weak-interaction gate: xi >= xi_min
    tr.reports.push_back(make_report("weak-interaction", inputs, xi_min, xi, 0.0));
    return tr;
}

LipschitzProbe conditional_lipschitz_probe(const ModelParams& model, int k)
{
    if (!model.is_quadratic()) throw std::invalid_argument("conditional_lipschitz_probe: quadratic models only");
    if (k < 1 || k >= model.N) throw std::out_of_range("conditional_lipschitz_probe: need 1 <= k < N");
    const ExchangeableGaussian g = stationary_exchangeable_gaussian(model);
    // Conditional mean of particle k+1 is c * sum_{j<=k} x^j; its operator norm is c sqrt(k).
    const double c = g.b / (g.a - g.b * (model.N - k));
    LipschitzProbe p;
    p.L_exact = c * std::sqrt(static_cast<double>(k));
    p.normalized = model.lambda > 0.0
                       ? p.L_exact * (model.N - 1 + model.lambda * k) / (model.lambda * std::sqrt(static_cast<double>(k)))
                       : NAN;
    const double rhs = 2.0 * model.lambda * std::sqrt(static_cast<double>(k)) / model.N;
    p.report = make_report("conditional-lipschitz",
                           digest({{"lambda", model.lambda}, {"N", static_cast<double>(model.N)},
                                   {"k", static_cast<double>(k)}}),
                           p.L_exact, rhs);
    return p;
}

PocProbe fisher_poc_probe(const ModelParams& model, int k, const std::vector<int>& N_grid,
                          const std::vector<int>& k_grid)
{
    if (!model.is_quadratic()) throw std::invalid_argument("fisher_poc_probe: quadratic models only");
    PocProbe out;
    out.N_grid = N_grid;
    std::vector<std::pair<double, double>> fi_pts, kl_pts;
    for (int N : N_grid) {
        if (N <= k) throw std::invalid_argument("fisher_poc_probe: grid value N=" + std::to_string(N) + " <= k");
        ModelParams m = model;
        m.N = N;
        const GaussianSpec mu = marginal_covariance(stationary_exchangeable_gaussian(m), k);
        const GaussianSpec pi = mean_field_product(m, k);
        const double fi = fisher_functionals(mu, pi, 1.0).fisher;
        const double kl = kl_gaussian(mu, pi);
        out.fisher.push_back(fi);
        out.kl.push_back(kl);
        fi_pts.emplace_back(N, fi);
        kl_pts.emplace_back(N, kl);
    }
    auto try_fit = [](const std::vector<std::pair<double, double>>& pts) -> std::optional<double> {
        try {
            return fit_loglog_slope(pts).slope;
        } catch (const std::invalid_argument&) {
            return std::nullopt;
        }
    };
    out.fisher_slope = try_fit(fi_pts);
    out.kl_slope = try_fit(kl_pts);

    if (!k_grid.empty() && !N_grid.empty()) {
        ModelParams m = model;
        m.N = *std::max_element(N_grid.begin(), N_grid.end());
        const ExchangeableGaussian g = stationary_exchangeable_gaussian(m);
        std::vector<std::pair<double, double>> pts;
        for (int kk : k_grid) {
            if (kk < 1 || kk >= m.N) throw std::invalid_argument("fisher_poc_probe: k grid outside [1, N)");
            pts.emplace_back(kk, kl_gaussian(marginal_covariance(g, kk), mean_field_product(m, kk)));
        }
        if (pts.size() >= 2) {
            // Two-point exponents are allowed here; fit by hand to avoid the 4-point floor.
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            int n = 0;
            for (const auto& [x, y] : pts) {
                if (!(y > 0.0)) continue;
                const double lx = std::log(x), ly = std::log(y);
                sx += lx;
                sy += ly;
                sxx += lx * lx;
                sxy += lx * ly;
                ++n;
            }
            if (n >= 2) out.k_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        }
    }
    return out;
}

}  // namespace poclab
