#include "poclab/errors.hpp"
#include "poclab/experiment.hpp"
#include "poclab/divergence.hpp"
#include "poclab/gaussian.hpp"
#include "poclab/rng.hpp"
#include "poclab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace poclab {

namespace {

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string report_csv(const std::vector<VerificationReport>& reports)
{
    std::ostringstream os;
    write_report_csv(os, reports);
    return os.str();
}

std::string tally(const std::vector<VerificationReport>& reports)
{
    // per-lemma pass counts, in first-seen order
    std::vector<std::string> order;
    std::map<std::string, std::pair<int, int>> counts;
    for (const auto& r : reports) {
        auto [it, fresh] = counts.try_emplace(r.lemma, 0, 0);
        if (fresh) order.push_back(r.lemma);
        it->second.second += 1;
        if (r.pass) it->second.first += 1;
    }
    std::string s;
    for (const auto& lemma : order) {
        const auto [pass, total] = counts[lemma];
        s += lemma + ": " + std::to_string(pass) + "/" + std::to_string(total) + " pass\n";
    }
    for (const auto& r : reports)
        if (!r.pass) s += "FAIL " + r.lemma + " [" + r.inputs + "] lhs=" + num(r.lhs) + " rhs=" + num(r.rhs) + "\n";
    return s;
}

CommandOutput reports_output(std::vector<VerificationReport> reports, std::string summary)
{
    CommandOutput out;
    out.csv = report_csv(reports);
    out.summary = std::move(summary) + tally(reports);
    out.status = all_pass(reports) ? 0 : 1;
    return out;
}

ScalingRow base_row(const ExperimentConfig& cfg, const char* name)
{
    ScalingRow r;
    r.experiment = name;
    r.d = cfg.d;
    r.k = cfg.k;
    r.q = cfg.q;
    r.lambda = cfg.lambda;
    r.N = cfg.N;
    return r;
}

CommandOutput run_gaussian(const ExperimentConfig& cfg)
{
    const ModelParams model = cfg.model();
    const auto g = stationary_exchangeable_gaussian(model);
    const GaussianSpec mu = marginal_covariance(g, cfg.k);
    const GaussianSpec nu = mean_field_product(model, cfg.k);

    std::vector<ScalingRow> rows;
    auto add = [&](const char* name, double value, bool divergent = false) {
        ScalingRow r = base_row(cfg, name);
        r.divergent = divergent;
        r.value = divergent ? std::numeric_limits<double>::infinity() : value;
        rows.push_back(r);
    };
    const Divergence R = renyi_gaussian(mu, nu, cfg.q);
    add("renyi", R.value_or(0.0), R.is_divergent());
    add("kl", kl_gaussian(mu, nu));
    try {
        const auto f = fisher_functionals(mu, nu, cfg.q);
        add("fisher", f.fisher);
        add("renyi-fisher", f.renyi_fisher);
    } catch (const DivergentError&) {
        add("fisher", fisher_functionals(mu, nu, 1.0).fisher);
        add("renyi-fisher", 0.0, true);
    }
    add("w2", w2_bures(mu, nu));
    add("threshold", renyi_existence_threshold(cfg.lambda, cfg.k, cfg.q));
    add("asymptotic", asymptotic_coefficient(cfg.lambda, cfg.k, cfg.q, cfg.d));

    CommandOutput out;
    std::ostringstream os;
    write_scaling_csv(os, rows);
    out.csv = os.str();
    for (const auto& r : rows) out.summary += r.experiment + " = " + (r.divergent ? "inf" : num(r.value)) + "\n";
    return out;
}

CommandOutput run_sweep(const ExperimentConfig& cfg)
{
    const ScalingResult result = run_scaling(cfg);
    CommandOutput out;
    std::ostringstream os;
    write_scaling_csv(os, result.rows);
    out.csv = os.str();
    if (cfg.format != OutputFormat::Csv) out.svg = render_plot(result);

    std::string& s = out.summary;
    int divergent = 0;
    for (const auto& r : result.rows) divergent += r.divergent ? 1 : 0;
    s += std::to_string(result.rows.size()) + " grid points, " + std::to_string(divergent) + " divergent\n";
    if (result.fit)
        s += "slope = " + num(result.fit->slope) + " +/- " + num(result.fit->half_width) + " (" +
             std::to_string(result.fit->points) + " points)\n";
    else
        s += "slope undefined (fewer than 4 finite positive rows)\n";
    if (result.scaled_at_max) s += "N^2 value at largest N = " + num(*result.scaled_at_max) + "\n";
    if (result.limit_estimate) s += "extrapolated N^2 value = " + num(*result.limit_estimate) + "\n";
    if (result.asymptotic_reference) s += "asymptotic coefficient = " + num(*result.asymptotic_reference) + "\n";
    return out;
}

std::vector<VerificationReport> random_inequality_sweep(int count, std::uint64_t seed)
{
    CounterRng rng(seed, 0x766572ull);
    std::vector<VerificationReport> out;
    for (int i = 0; i < count; ++i) {
        const int d = 1 + static_cast<int>(rng.below(4));
        const int k = 1 + static_cast<int>(rng.below(3));
        const double q = 1.1 + 2.9 * rng.uniform();
        const double lambda = 2.0 * rng.uniform();
        const double threshold = renyi_existence_threshold(lambda, k, q);
        const int N = std::max(k + 1, static_cast<int>(std::floor(threshold)) + 1) + static_cast<int>(rng.below(16));

        const ModelParams model = ModelParams::quadratic(d, N, lambda);
        const GaussianSpec mu = marginal_covariance(stationary_exchangeable_gaussian(model), k);
        const GaussianSpec nu = mean_field_product(model, k);
        out.push_back(renyi_lsi_check(mu, nu, q));
        if (q >= 2.0) out.push_back(tilt_kl_check(mu, nu, q));
    }
    return out;
}

std::vector<VerificationReport> lsi_certificates(const ModelParams& model)
{
    const int N = model.N;
    const auto g = stationary_exchangeable_gaussian(model);
    const double exact = 1.0 / std::min(g.precision_eigen_parallel(), g.precision_eigen_orthogonal());
    const std::string inputs = digest({{"alpha_V0", model.alpha_V0}, {"lambda", model.lambda}, {"N", double(N)}});

    // Hessian of the energy: diagonal alpha + lambda, off-diagonal -lambda / (N - 1).
    Eigen::VectorXd tau = Eigen::VectorXd::Constant(N, model.alpha_V0 + model.lambda);
    Eigen::MatrixXd beta = Eigen::MatrixXd::Constant(N, N, model.lambda / (N - 1));
    beta.diagonal().setZero();
    const LsiCertificate cert = otto_reznikoff_certificate(tau, beta);

    std::vector<VerificationReport> out;
    auto r = make_report("otto-reznikoff", inputs, exact, cert.constant.value_or(-1.0));
    r.note = cert.certified() ? "zeta=" + num(cert.zeta) : "not certified";
    out.push_back(r);
    out.push_back(make_report("holley-stroock", inputs, exact,
                              holley_stroock_bound(model.alpha_V0, model.alpha_W0, model.osc_V1, model.osc_W1, N)));
    return out;
}

std::vector<VerificationReport> poc_slopes(const ExperimentConfig& cfg)
{
    const std::vector<int> grid{64, 128, 256, 512, 1024, 2048, 4096};
    const ModelParams model = ModelParams::quadratic(cfg.d, grid.back(), cfg.lambda);
    const PocProbe probe = fisher_poc_probe(model, cfg.k, grid);
    std::vector<VerificationReport> out;
    const std::string inputs = digest({{"lambda", cfg.lambda}, {"k", double(cfg.k)}, {"d", double(cfg.d)}});
    if (probe.fisher_slope) out.push_back(make_report("fisher-poc-slope", inputs, std::abs(*probe.fisher_slope + 2.0), 0.05));
    if (probe.kl_slope) out.push_back(make_report("kl-poc-slope", inputs, std::abs(*probe.kl_slope + 2.0), 0.05));
    return out;
}

CommandOutput run_verify(const ExperimentConfig& cfg)
{
    const ModelParams model = cfg.model();
    std::vector<VerificationReport> reports = random_inequality_sweep(cfg.configs, cfg.seed());
    std::string summary;

    const RecursionTrace trace = recursion_chain(cfg.beta_W, cfg.c_lsi_bar, cfg.N, cfg.k, cfg.delta_sq, cfg.xi_min);
    reports.insert(reports.end(), trace.reports.begin(), trace.reports.end());

    const LipschitzProbe lip = conditional_lipschitz_probe(model, cfg.k);
    reports.push_back(lip.report);

    try {
        const auto tails = change_of_measure_report(model, cfg.k, cfg.q, cfg.radii, cfg.heuristic);
        reports.insert(reports.end(), tails.begin(), tails.end());
    } catch (const DivergentError&) {
        summary += "change-of-measure skipped: Renyi divergence is infinite at this N\n";
    }

    // Lipschitz test function under the mean field; c = C_LSI(pi).
    const double c = 1.0 / (model.alpha_V0 + model.lambda);
    const double L = 1.0;
    const double tmax = 0.25 / (L * L * c);
    const auto mgf = subgaussian_mgf_check(L, c, {0.1 * tmax, 0.25 * tmax, 0.5 * tmax, tmax}, cfg.mc_samples,
                                           splitmix64(cfg.seed() ^ 0x6d6766ull));
    reports.insert(reports.end(), mgf.begin(), mgf.end());

    const auto certs = lsi_certificates(model);
    reports.insert(reports.end(), certs.begin(), certs.end());

    const auto slopes = poc_slopes(cfg);
    reports.insert(reports.end(), slopes.begin(), slopes.end());

    summary += "xi = " + num(trace.xi) + ", K1 unrolled = " + num(trace.k1_unrolled) + "\n";
    return reports_output(std::move(reports), std::move(summary));
}

CommandOutput run_tails(const ExperimentConfig& cfg)
{
    auto reports = change_of_measure_report(cfg.model(), cfg.k, cfg.q, cfg.radii, cfg.heuristic);
    std::string summary;
    if (!reports.empty() && !reports.front().note.empty()) summary += "note: " + reports.front().note + "\n";
    return reports_output(std::move(reports), std::move(summary));
}

CommandOutput run_recursion(const ExperimentConfig& cfg)
{
    RecursionTrace trace = recursion_chain(cfg.beta_W, cfg.c_lsi_bar, cfg.N, cfg.k, cfg.delta_sq, cfg.xi_min);
    std::string summary = "xi = " + num(trace.xi) + "\nterminal = " + num(trace.terminal) +
                          "\nK1 unrolled = " + num(trace.k1_unrolled) + "\nK1 bound = " + num(trace.k1_bound) +
                          "\nK1 closed bound = " + num(trace.k1_closed_bound) + "\nweak interaction " +
                          (trace.meets_weak_interaction ? "met" : "not met") + "\n";
    return reports_output(std::move(trace.reports), std::move(summary));
}

CommandOutput run_fixpoint(const ExperimentConfig& cfg)
{
    const ModelParams model = cfg.model();
    const MeanFieldSolution sol = mean_field_fixed_point(model, cfg.damping, cfg.tol, cfg.max_iter, cfg.grid_points);
    const std::string inputs =
        digest({{"lambda", cfg.lambda}, {"d", double(cfg.d)}, {"amplitude", cfg.perturbation_amplitude}});
    std::vector<VerificationReport> reports;
    std::string summary;
    if (sol.gaussian) {
        const double residual = mean_field_residual(*sol.gaussian, model);
        reports.push_back(make_report("fixpoint-residual", inputs, residual, cfg.tol, 0.0));
        summary += "closed form N(0, " + num(sol.gaussian->max_eigenvalue()) + " I)\n";
    } else {
        reports.push_back(make_report("fixpoint-change", inputs, sol.last_change, cfg.tol, 0.0));
        summary += "iterations = " + std::to_string(sol.iterations) + "\nmean = " + num(sol.mean) +
                   "\nvariance = " + num(sol.variance) + "\n";
    }
    return reports_output(std::move(reports), std::move(summary));
}

}  // namespace

std::optional<ExperimentKind> kind_for_subcommand(std::string_view subcommand)
{
    if (subcommand == "gaussian") return ExperimentKind::Gaussian;
    if (subcommand == "scaling") return ExperimentKind::GaussianScaling;
    if (subcommand == "simulate") return ExperimentKind::Simulate;
    if (subcommand == "verify") return ExperimentKind::Verify;
    if (subcommand == "tails") return ExperimentKind::Tails;
    if (subcommand == "recursion") return ExperimentKind::Recursion;
    if (subcommand == "fixpoint") return ExperimentKind::Fixpoint;
    return std::nullopt;
}

CommandOutput run_command(std::string_view subcommand, const ExperimentConfig& cfg)
{
    if (!kind_for_subcommand(subcommand)) throw std::invalid_argument("unknown subcommand '" + std::string(subcommand) + "'");
    cfg.validate();
    if (subcommand == "gaussian") return run_gaussian(cfg);
    if (subcommand == "scaling" || subcommand == "simulate") {
        if (cfg.kind != ExperimentKind::GaussianScaling && cfg.kind != ExperimentKind::Simulate)
            throw ConfigError(0, "subcommand '" + std::string(subcommand) + "' needs a scaling or simulate config");
        return run_sweep(cfg);
    }
    if (subcommand == "verify") return run_verify(cfg);
    if (subcommand == "tails") return run_tails(cfg);
    if (subcommand == "recursion") return run_recursion(cfg);
    return run_fixpoint(cfg);
}

}  // namespace poclab
