// One line per acceptance criterion; exit status 1 if any fails.
#include "poclab/divergence.hpp"
#include "poclab/experiment.hpp"
#include "poclab/gaussian.hpp"
#include "poclab/particle_engine.hpp"
#include "poclab/rng.hpp"
#include "poclab/slope.hpp"
#include "poclab/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

using namespace poclab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void line(int id, bool pass, const std::string& what)
{
    std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", what.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

void guarded(int id, const std::function<void()>& body)
{
    try {
        body();
    } catch (const std::exception& e) {
        line(id, false, std::string("threw: ") + e.what());
    }
}

double renyi_marginal(double lambda, int N, int k, double q, int d)
{
    const auto m = ModelParams::quadratic(d, N, lambda);
    return renyi_gaussian(marginal_covariance(stationary_exchangeable_gaussian(m), k), mean_field_product(m, k), q).value();
}

}  // namespace

int main()
{
    guarded(1, [] {
        const auto t0 = Clock::now();
        auto cfg = default_config(ExperimentKind::GaussianScaling);
        cfg.lambda = 1;
        cfg.k = 1;
        cfg.q = 2;
        cfg.d = 1;
        cfg.grid = {64, 128, 256, 512, 1024, 2048, 4096};
        const ScalingResult r = run_scaling(cfg);
        const double secs = seconds_since(t0);
        const double slope = r.fit ? r.fit->slope : NAN;
        const double scaled = r.scaled_at_max.value_or(NAN);
        const bool ok = slope >= -2.05 && slope <= -1.95 && std::abs(scaled / 0.125 - 1) <= 0.03 && secs < 1.0;
        line(1, ok, fmt("gaussian N-scaling: slope %.5f, N^2 R(4096) %.6f vs 0.125, %.3f s", slope, scaled, secs));
    });

    guarded(2, [] {
        double worst = 0;
        for (int k : {1, 2, 3}) {
            const double one = renyi_marginal(1.0, 10, k, 2.0, 1);
            for (int d = 1; d <= 8; ++d)
                worst = std::max(worst, std::abs(renyi_marginal(1.0, 10, k, 2.0, d) - d * one) / (d * one));
        }
        line(2, worst <= 1e-10, fmt("d-linearity: worst relative deviation %.3g over d = 1..8", worst));
    });

    guarded(3, [] {
        const auto m = ModelParams::quadratic(1, 3, 1.0);
        const auto mu = marginal_covariance(stationary_exchangeable_gaussian(m), 1);
        const auto nu = mean_field_product(m, 1);
        const double r = renyi_gaussian(mu, nu, 1 + 1e-4).value();
        const double kl = kl_gaussian(mu, nu);
        const double rel = std::abs(r - kl) / kl;
        line(3, rel <= 0.01, fmt("q -> 1: R_{1+1e-4} %.8g, KL %.8g, relative gap %.3g", r, kl, rel));
    });

    guarded(4, [] {
        const auto t0 = Clock::now();
        CounterRng rng(20240601, 4);
        int checks = 0, passed = 0;
        double worst = INFINITY;
        for (int i = 0; i < 200; ++i) {
            const int d = 1 + static_cast<int>(rng.below(4));
            const int k = 1 + static_cast<int>(rng.below(3));
            const double q = 1.1 + 2.9 * rng.uniform();
            const double lambda = 2.0 * rng.uniform();
            const int N = std::max(k + 1, static_cast<int>(std::floor(renyi_existence_threshold(lambda, k, q))) + 1) +
                          static_cast<int>(rng.below(64));
            const auto m = ModelParams::quadratic(d, N, lambda);
            const auto mu = marginal_covariance(stationary_exchangeable_gaussian(m), k);
            const auto nu = mean_field_product(m, k);
            std::vector<VerificationReport> reps{renyi_lsi_check(mu, nu, q)};
            if (q >= 2) reps.push_back(tilt_kl_check(mu, nu, q));
            for (const auto& r : reps) {
                ++checks;
                passed += r.pass ? 1 : 0;
                worst = std::min(worst, r.slack / std::max(1.0, std::abs(r.rhs)));
            }
        }
        const double secs = seconds_since(t0);
        line(4, passed == checks && secs < 5.0,
             fmt("inequality sweep: %.0f/%.0f pass, min scaled slack %.3g, %.3f s", passed, checks, worst, secs));
    });

    guarded(5, [] {
        bool ok = true;
        double worst = INFINITY;
        for (double xi : {1.0, 2.0, 5.0, 10.0})
            for (int k : {1, 2}) {
                const auto t = recursion_chain(1.0, std::sqrt(1 / (2 * xi)), 500, k, 1.0, 0.0, 1e-12);
                const auto& r = t.reports.front();
                ok = ok && r.lemma == "coefficient-product" && r.pass && r.slack >= -1e-12;
                worst = std::min(worst, r.slack);
            }
        line(5, ok, fmt("coefficient products: all pairs up to N = 500, worst slack %.3g", worst));
    });

    guarded(6, [] {
        double worst = 0;
        for (double lambda : {0.5, 1.0, 2.0})
            for (int k : {1, 2, 4})
                for (int N = 8; N <= 1024; N *= 2)
                    worst = std::max(worst, std::abs(conditional_lipschitz_probe(ModelParams::quadratic(1, N, lambda), k).normalized - 1));
        std::vector<std::pair<double, double>> pts;
        for (int N = 8; N <= 1024; N *= 2)
            pts.emplace_back(N, conditional_lipschitz_probe(ModelParams::quadratic(1, N, 1.0), 1).L_exact);
        const double slope = fit_loglog_slope(pts).slope;
        line(6, worst <= 1e-9 && std::abs(slope + 1) <= 0.02,
             fmt("conditional Lipschitz: max |normalized - 1| %.3g, slope %.4f", worst, slope));
    });

    guarded(7, [] {
        const auto t0 = Clock::now();
        const auto m = ModelParams::quadratic(2, 8, 1.0);
        SamplerConfig cfg;
        cfg.chains = 64;
        cfg.steps = 100000;
        cfg.master_seed = 7;
        const auto ens = mala_sample(m, cfg);
        const Eigen::MatrixXd x = ens.leading_particles(1);
        const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
        const Eigen::MatrixXd emp = centered.transpose() * centered / static_cast<double>(x.rows());
        const Eigen::MatrixXd exact = marginal_covariance(stationary_exchangeable_gaussian(m), 1).dense_covariance();
        const double rel = (emp - exact).norm() / exact.norm();
        double lo = 1, hi = 0;
        for (double a : ens.acceptance) {
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
        const double secs = seconds_since(t0);
        line(7, rel <= 0.03 && lo >= 0.4 && hi <= 0.8 && secs < 60,
             fmt("MALA fidelity: Frobenius rel %.4f, acceptance [%.3f, %.3f], %.1f s", rel, lo, hi, secs));
    });

    guarded(8, [] {
        const auto m = ModelParams::quadratic(1, 3, 1.0);
        SamplerConfig cfg;
        cfg.chains = 50;
        cfg.thinning = 20;
        cfg.steps = 20000 * cfg.thinning;
        cfg.master_seed = 8;
        const auto ens = mala_sample(m, cfg);
        const Eigen::MatrixXd x = ens.leading_particles(1);
        const auto est = plugin_renyi_estimate(x, mean_field_product(m, 1), 2.0, 8);
        const double v = est.value.value();
        const double z = std::abs(v - 0.020411) / est.std_error;
        line(8, x.rows() == 1000000 && z <= 3,
             fmt("plug-in estimate: %.6f +/- %.6f vs 0.020411 (%.2f stderr, n = %.0f)", v, est.std_error, z,
                 static_cast<double>(x.rows())));
    });

    guarded(9, [] {
        std::vector<double> radii;
        for (int i = 0; i <= 8; ++i) radii.push_back(0.5 * i);
        int total = 0, passed = 0;
        for (double lambda : {0.5, 1.0})
            for (int N : {3, 8, 32})
                for (const auto& r : change_of_measure_report(ModelParams::quadratic(1, N, lambda), 1, 2.0, radii)) {
                    ++total;
                    passed += r.pass ? 1 : 0;
                }
        line(9, total == 108 && passed == total, fmt("change of measure: %.0f/%.0f bounds hold", passed, total));
    });

    guarded(10, [] {
        const std::vector<std::pair<const char*, ExperimentKind>> subs{
            {"gaussian", ExperimentKind::Gaussian},   {"scaling", ExperimentKind::GaussianScaling},
            {"simulate", ExperimentKind::Simulate},   {"verify", ExperimentKind::Verify},
            {"tails", ExperimentKind::Tails},         {"recursion", ExperimentKind::Recursion},
            {"fixpoint", ExperimentKind::Fixpoint}};
        int same = 0;
        for (const auto& [name, kind] : subs) {
            auto cfg = default_config(kind);
            cfg.sampler.master_seed = 1234;
            if (kind == ExperimentKind::Simulate) {
                cfg.sampler.steps = 4000;
                cfg.sampler.burn_in = 1000;
            }
            if (kind == ExperimentKind::Fixpoint) cfg.perturbation_amplitude = 0.1;
            const auto a = run_command(name, cfg);
            const auto b = run_command(name, cfg);
            same += (a.csv == b.csv && !a.csv.empty()) ? 1 : 0;
        }
        line(10, same == static_cast<int>(subs.size()),
             fmt("determinism: %.0f/%.0f subcommands byte-identical", same, static_cast<double>(subs.size())));
    });

    guarded(11, [] {
        const std::vector<int> grid{64, 128, 256, 512, 1024, 2048, 4096};
        const auto p = fisher_poc_probe(ModelParams::quadratic(1, 4096, 1.0), 1, grid);
        const double fs = p.fisher_slope.value_or(NAN), ks = p.kl_slope.value_or(NAN);
        line(11, std::abs(fs + 2) <= 0.05 && std::abs(ks + 2) <= 0.05, fmt("FI slope %.4f, KL slope %.4f", fs, ks));
    });

    std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
