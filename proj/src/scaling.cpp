#include "poclab/divergence.hpp"
#include "poclab/experiment.hpp"
#include "poclab/rng.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace poclab {

SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points)
{
    std::vector<std::pair<double, double>> logs;
    for (const auto& [x, y] : points)
        if (x > 0.0 && y > 0.0 && std::isfinite(x) && std::isfinite(y)) logs.emplace_back(std::log(x), std::log(y));
    if (logs.size() < 4) throw std::invalid_argument("fit_loglog_slope: fewer than 4 finite positive points");

    const double n = static_cast<double>(logs.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [lx, ly] : logs) {
        mx += lx;
        my += ly;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [lx, ly] : logs) {
        sxx += (lx - mx) * (lx - mx);
        sxy += (lx - mx) * (ly - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_loglog_slope: x values are all equal");

    SlopeFit fit;
    fit.points = static_cast<int>(logs.size());
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (const auto& [lx, ly] : logs) {
        const double r = ly - (fit.intercept + fit.slope * lx);
        sse += r * r;
    }
    const double se = std::sqrt(sse / (n - 2.0) / sxx);
    const boost::math::students_t t(n - 2.0);
    fit.half_width = boost::math::quantile(boost::math::complement(t, 0.025)) * se;
    return fit;
}

double axis_value(const ScalingRow& row, SweepAxis axis)
{
    switch (axis) {
    case SweepAxis::N: return row.N;
    case SweepAxis::d: return row.d;
    case SweepAxis::k: return row.k;
    case SweepAxis::q: return row.q;
    }
    return 0.0;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn)
{
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    int count = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    count = std::clamp(count, 1, static_cast<int>(std::max<std::size_t>(n, 1)));
    if (count == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < count; ++i) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

ScalingRow row_for(const ExperimentConfig& cfg, double axis)
{
    ScalingRow row;
    row.experiment = std::string(to_string(cfg.kind));
    row.d = cfg.d;
    row.k = cfg.k;
    row.q = cfg.q;
    row.lambda = cfg.lambda;
    row.N = cfg.N;
    switch (cfg.sweep) {
    case SweepAxis::N: row.N = static_cast<int>(axis); break;
    case SweepAxis::d: row.d = static_cast<int>(axis); break;
    case SweepAxis::k: row.k = static_cast<int>(axis); break;
    case SweepAxis::q: row.q = axis; break;
    }
    return row;
}

ModelParams model_for(const ExperimentConfig& cfg, const ScalingRow& row)
{
    ModelParams m = ModelParams::quadratic(row.d, row.N, row.lambda);
    m.alpha_V0 = cfg.alpha_V0;
    return m;
}

void evaluate_exact(ScalingRow& row, const ExperimentConfig& cfg)
{
    const ModelParams m = model_for(cfg, row);
    const Divergence r =
        renyi_gaussian(marginal_covariance(stationary_exchangeable_gaussian(m), row.k), mean_field_product(m, row.k), row.q);
    row.divergent = r.is_divergent();
    row.value = r.value_or(INFINITY);
}

void evaluate_simulated(ScalingRow& row, const ExperimentConfig& cfg, std::size_t index)
{
    const ModelParams m = model_for(cfg, row);
    SamplerConfig sc = cfg.sampler;
    sc.master_seed = splitmix64(cfg.sampler.master_seed + index);
    sc.threads = 1;
    const ParticleEnsemble ens = mala_sample(m, sc);
    const DivergenceEstimate est =
        plugin_renyi_estimate(ens.leading_particles(row.k), mean_field_product(m, row.k), row.q,
                              splitmix64(sc.master_seed ^ 0x5eedull), cfg.bootstrap);
    row.divergent = est.value.is_divergent();
    row.value = est.value.value_or(INFINITY);
    row.std_error = est.std_error;
}

}  // namespace

ScalingResult run_scaling(const ExperimentConfig& cfg)
{
    if (cfg.kind != ExperimentKind::GaussianScaling && cfg.kind != ExperimentKind::Simulate)
        throw std::invalid_argument("run_scaling: experiment must be gaussian-scaling or simulate");
    cfg.validate();

    ScalingResult res;
    res.axis = cfg.sweep;
    std::vector<double> grid = cfg.grid;
    std::sort(grid.begin(), grid.end());
    res.rows.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) res.rows[i] = row_for(cfg, grid[i]);

    const bool simulate = cfg.kind == ExperimentKind::Simulate;
    // Simulation parallelizes over grid points, chains run serially inside.
    parallel_for(res.rows.size(), simulate ? cfg.sampler.threads : 1, [&](std::size_t i) {
        if (simulate)
            evaluate_simulated(res.rows[i], cfg, i);
        else
            evaluate_exact(res.rows[i], cfg);
    });

    if (std::all_of(res.rows.begin(), res.rows.end(), [](const ScalingRow& r) { return r.divergent; }))
        throw std::runtime_error("run_scaling: every grid point is divergent");

    std::vector<const ScalingRow*> finite;
    for (const auto& r : res.rows)
        if (!r.divergent && r.value > 0.0) finite.push_back(&r);
    std::size_t skip = static_cast<std::size_t>(std::floor(cfg.fit_exclude_fraction * static_cast<double>(finite.size())));
    if (finite.size() >= 4) skip = std::min(skip, finite.size() - 4);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = skip; i < finite.size(); ++i) pts.emplace_back(axis_value(*finite[i], cfg.sweep), finite[i]->value);
    if (pts.size() >= 4) res.fit = fit_loglog_slope(pts);

    if (cfg.sweep == SweepAxis::N) {
        std::vector<const ScalingRow*> usable;
        for (const auto& r : res.rows)
            if (!r.divergent) usable.push_back(&r);
        if (!usable.empty()) {
            const ScalingRow& last = *usable.back();
            res.scaled_at_max = static_cast<double>(last.N) * last.N * last.value;
        }
        if (usable.size() >= 2) {
            // N^2 R = c + c1 / N + ...: eliminate the 1/N term between the two largest N.
            const ScalingRow& a = *usable[usable.size() - 2];
            const ScalingRow& b = *usable.back();
            const double fa = static_cast<double>(a.N) * a.N * a.value;
            const double fb = static_cast<double>(b.N) * b.N * b.value;
            res.limit_estimate = (b.N * fb - a.N * fa) / static_cast<double>(b.N - a.N);
        }
        res.asymptotic_reference = asymptotic_coefficient(cfg.lambda, cfg.k, cfg.q, cfg.d);
    }
    return res;
}

}  // namespace poclab
