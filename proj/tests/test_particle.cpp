#include "poclab/errors.hpp"
#include "poclab/gaussian.hpp"
#include "poclab/particle_engine.hpp"

#include <doctest.h>

#include <cmath>

using namespace poclab;

namespace {

SamplerConfig quick(int chains, long steps, std::uint64_t seed = 11)
{
    SamplerConfig c;
    c.chains = chains;
    c.steps = steps;
    c.burn_in = 2000;
    c.thinning = 5;
    c.master_seed = seed;
    return c;
}

Eigen::MatrixXd second_moment(const Eigen::MatrixXd& x) { return x.transpose() * x / static_cast<double>(x.rows()); }

}  // namespace

TEST_CASE("sampler config validation and hashing")
{
    SamplerConfig c;
    CHECK_NOTHROW(c.validate());
    c.step_size = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = SamplerConfig{};
    c.chains = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = SamplerConfig{};
    c.thinning = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    SamplerConfig a, b;
    CHECK(a.hash() == b.hash());
    b.master_seed = 1;
    CHECK(a.hash() != b.hash());
}

TEST_CASE("standard gaussian target without interaction")
{
    const auto ens = mala_sample(ModelParams::quadratic(1, 2, 0.0), quick(8, 100000));
    const Eigen::MatrixXd x = ens.leading_particles(1);
    const double var = second_moment(x)(0, 0);
    CHECK(var >= 0.97);
    CHECK(var <= 1.03);
    for (double a : ens.acceptance) {
        CHECK(a >= 0.4);
        CHECK(a <= 0.8);
    }
}

TEST_CASE("marginal variance for lambda = 1, N = 3")
{
    const auto model = ModelParams::quadratic(1, 3, 1.0);
    const auto ens = mala_sample(model, quick(16, 50000));
    CHECK(ens.N() == 3);
    CHECK(ens.d() == 1);
    CHECK(ens.size() == 16 * 10000);
    const double var = second_moment(ens.leading_particles(1))(0, 0);
    CHECK(var == doctest::Approx(0.6).epsilon(0.02));

    SUBCASE("exchangeability of particles 1 and 2")
    {
        const Eigen::MatrixXd two = ens.leading_particles(2);
        const double n = static_cast<double>(two.rows());
        const double m1 = two.col(0).mean(), m2 = two.col(1).mean();
        const double v1 = (two.col(0).array() - m1).square().mean();
        const double v2 = (two.col(1).array() - m2).square().mean();
        // thinned samples are correlated; inflate the iid standard error by 3
        const double se_mean = 3 * std::sqrt((v1 + v2) / n);
        CHECK(std::abs(m1 - m2) / se_mean <= 4);
        const double se_var = 3 * std::sqrt(2 * (v1 * v1 + v2 * v2) / n);
        CHECK(std::abs(v1 - v2) / se_var <= 4);
    }
}

TEST_CASE("sampler determinism and scheduling independence")
{
    const auto model = ModelParams::quadratic(2, 4, 1.0);
    auto cfg = quick(6, 2000, 99);
    cfg.burn_in = 300;
    cfg.threads = 1;
    const auto a = mala_sample(model, cfg);
    cfg.threads = 3;
    const auto b = mala_sample(model, cfg);
    const auto c = mala_sample(model, cfg);
    CHECK(a.raw() == b.raw());
    CHECK(b.raw() == c.raw());
    CHECK(a.acceptance == b.acceptance);
    CHECK(a.step_sizes == b.step_sizes);
    CHECK(a.config_hash == cfg.hash());
    cfg.master_seed = 100;
    CHECK(mala_sample(model, cfg).raw() != a.raw());

    // a chain's output does not depend on how many chains run beside it
    auto one = cfg;
    one.master_seed = 99;
    one.chains = 1;
    const auto solo = mala_sample(model, one);
    const auto first = a.snapshot(0);
    CHECK(solo.snapshot(0).isApprox(first, 0.0));
}

TEST_CASE("snapshot layout")
{
    const auto model = ModelParams::quadratic(2, 3, 0.5);
    auto cfg = quick(2, 100);
    cfg.burn_in = 10;
    cfg.thinning = 10;
    const auto e = mala_sample(model, cfg);
    CHECK(e.snapshots_per_chain() == 10);
    const Eigen::MatrixXd lead = e.leading_particles(2);
    CHECK(lead.rows() == 20);
    CHECK(lead.cols() == 4);
    const auto s = e.snapshot(13);
    CHECK(lead(13, 2) == s(1, 0));
    CHECK(lead(13, 1) == s(0, 1));
    CHECK_THROWS(e.snapshot(20));
    CHECK_THROWS(e.leading_particles(4));
}

TEST_CASE("non-adaptive chain with a huge step is rejected")
{
    auto cfg = quick(1, 2000);
    cfg.adapt = false;
    cfg.step_size = 50.0;
    CHECK_THROWS_AS(mala_sample(ModelParams::quadratic(3, 10, 1.0), cfg), SamplerError);
}

TEST_CASE("mean field closed forms")
{
    const auto s = mean_field_fixed_point(ModelParams::quadratic(3, 5, 1.0), 0.5, 1e-10, 100);
    REQUIRE(s.gaussian);
    CHECK(s.gaussian->dense_covariance().isApprox(0.5 * Eigen::MatrixXd::Identity(3, 3)));
    const auto free = mean_field_fixed_point(ModelParams::quadratic(1, 5, 0.0), 0.5, 1e-10, 100);
    CHECK(free.gaussian->dense_covariance()(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("perturbed mean field against a direct convolution")
{
    for (double phase : {0.0, 0.7}) {
        const double lambda = 1.0;
        const auto model = ModelParams::perturbed(1, 10, lambda, CosinePerturbation{0.1, 1.0, phase});
        const auto s = mean_field_fixed_point(model, 0.5, 1e-12, 10000, 1024);
        REQUIRE(!s.gaussian);
        CHECK(s.last_change <= 1e-12);
        const auto& x = s.grid;
        const auto& rho = s.density;
        const std::size_t n = x.size();
        const double h = x[1] - x[0];
        auto trap = [&](const std::vector<double>& f) {
            double acc = 0.5 * (f.front() + f.back());
            for (std::size_t i = 1; i + 1 < n; ++i) acc += f[i];
            return acc * h;
        };
        // image of rho under the self-consistency map, with W * rho done point by point
        std::vector<double> img(n), tmp(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) tmp[j] = 0.5 * lambda * (x[i] - x[j]) * (x[i] - x[j]) * rho[j];
            const double conv = trap(tmp);
            const double v = 0.5 * x[i] * x[i] + 0.1 * std::cos(x[i] + phase);
            img[i] = std::exp(-v - conv);
        }
        const double z = trap(img);
        double worst = 0, peak = 0;
        for (std::size_t i = 0; i < n; ++i) {
            worst = std::max(worst, std::abs(img[i] / z - rho[i]));
            peak = std::max(peak, rho[i]);
        }
        CHECK(worst <= 1e-9 * peak);
        CHECK(trap(rho) == doctest::Approx(1.0).epsilon(1e-12));
        std::vector<double> m1(n), m2(n);
        for (std::size_t i = 0; i < n; ++i) {
            m1[i] = x[i] * rho[i];
            m2[i] = x[i] * x[i] * rho[i];
        }
        CHECK(s.mean == doctest::Approx(trap(m1)).epsilon(1e-10));
        CHECK(s.variance == doctest::Approx(trap(m2) - s.mean * s.mean).epsilon(1e-10));
        if (phase == 0.0) CHECK(std::abs(s.mean) < 1e-10);  // even potential
    }
}

TEST_CASE("mean field errors")
{
    const auto model = ModelParams::perturbed(1, 10, 1.0, CosinePerturbation{0.1, 1.0, 0.0});
    CHECK_THROWS_AS(mean_field_fixed_point(model, 0.5, 1e-14, 2, 512), ConvergenceError);
    CHECK_THROWS(mean_field_fixed_point(model, 0.0, 1e-10, 100));
    CHECK_THROWS(mean_field_fixed_point(ModelParams::perturbed(2, 10, 1.0, CosinePerturbation{0.1, 1.0, 0.0}), 0.5,
                                        1e-10, 100));
}
