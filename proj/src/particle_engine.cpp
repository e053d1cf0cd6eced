#include "poclab/particle_engine.hpp"

#include "poclab/errors.hpp"
#include "poclab/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace poclab {

void SamplerConfig::validate() const
{
    if (!(step_size > 0.0) || !std::isfinite(step_size)) throw std::invalid_argument("sampler: step_size must be > 0");
    if (burn_in < 0) throw std::invalid_argument("sampler: burn_in must be >= 0");
    if (thinning < 1) throw std::invalid_argument("sampler: thinning must be >= 1");
    if (chains < 1) throw std::invalid_argument("sampler: chains must be >= 1");
    if (steps < 1) throw std::invalid_argument("sampler: steps must be >= 1");
    if (!(target_accept > 0.0 && target_accept < 1.0))
        throw std::invalid_argument("sampler: target_accept must be in (0, 1)");
    if (threads < 0) throw std::invalid_argument("sampler: threads must be >= 0");
}

std::uint64_t SamplerConfig::hash() const
{
    // FNV-1a over the fields that determine the output (threads excluded).
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ull;
        }
    };
    mix(&step_size, sizeof step_size);
    mix(&burn_in, sizeof burn_in);
    mix(&thinning, sizeof thinning);
    mix(&chains, sizeof chains);
    mix(&steps, sizeof steps);
    mix(&master_seed, sizeof master_seed);
    const unsigned char a = adapt ? 1 : 0;
    mix(&a, 1);
    mix(&target_accept, sizeof target_accept);
    return h;
}

ParticleEnsemble::ParticleEnsemble(int N, int d, int chains, long per_chain)
    : acceptance(static_cast<std::size_t>(chains), 0.0),
      step_sizes(static_cast<std::size_t>(chains), 0.0),
      N_(N),
      d_(d),
      chains_(chains),
      per_chain_(per_chain),
      data_(static_cast<std::size_t>(chains) * per_chain * N * d, 0.0)
{
}

Eigen::Map<const Positions> ParticleEnsemble::snapshot(long s) const
{
    if (s < 0 || s >= size()) throw std::out_of_range("ensemble: snapshot index out of range");
    return {data_.data() + static_cast<std::size_t>(s) * N_ * d_, N_, d_};
}

Eigen::MatrixXd ParticleEnsemble::leading_particles(int k) const
{
    if (k < 1 || k > N_) throw std::out_of_range("ensemble: k must be in [1, N]");
    const long n = size();
    const int width = k * d_;
    Eigen::MatrixXd out(n, width);
    for (long s = 0; s < n; ++s) {
        const double* src = data_.data() + static_cast<std::size_t>(s) * N_ * d_;
        for (int c = 0; c < width; ++c) out(s, c) = src[c];
    }
    return out;
}

double* ParticleEnsemble::chain_data(int chain)
{
    return data_.data() + static_cast<std::size_t>(chain) * per_chain_ * N_ * d_;
}

namespace {

// Nesterov dual averaging of log step size (Hoffman & Gelman, NUTS).
class StepAdapter {
  public:
    StepAdapter(double h0, double target) : mu_(std::log(10.0 * h0)), target_(target), log_h_(std::log(h0)) {}

    double update(double accept_prob)
    {
        ++t_;
        const double t = static_cast<double>(t_);
        h_bar_ = (1.0 - 1.0 / (t + kT0)) * h_bar_ + (target_ - accept_prob) / (t + kT0);
        log_h_ = mu_ - std::sqrt(t) / kGamma * h_bar_;
        const double w = std::pow(t, -kKappa);
        log_h_avg_ = w * log_h_ + (1.0 - w) * log_h_avg_;
        return std::exp(log_h_);
    }

    double final_step() const { return t_ > 0 ? std::exp(log_h_avg_) : std::exp(log_h_); }

  private:
    static constexpr double kGamma = 0.05;
    static constexpr double kT0 = 10.0;
    static constexpr double kKappa = 0.75;

    double mu_;
    double target_;
    double log_h_;
    double log_h_avg_ = 0.0;
    double h_bar_ = 0.0;
    long t_ = 0;
};

}  // namespace

class MalaRunner {
  public:
    MalaRunner(const ModelParams& model, const SamplerConfig& cfg, ParticleEnsemble& out)
        : model_(model), cfg_(cfg), out_(out)
    {
    }

    void run_chain(int chain) const
    {
        const std::size_t dim = static_cast<std::size_t>(model_.N) * model_.d;
        CounterRng rng = CounterRng(cfg_.master_seed, 0).split(static_cast<std::uint64_t>(chain));

        std::vector<double> x(dim), y(dim), gx(dim), gy(dim);
        const double init_scale = 1.0 / std::sqrt(model_.alpha_V0 + model_.lambda);
        for (double& v : x) v = init_scale * rng.normal();
        double ex = energy_and_gradient(model_, x, gx);
        if (!std::isfinite(ex)) throw SamplerError(diagnostic(chain, 0, "non-finite initial energy"));

        double h = cfg_.step_size;
        StepAdapter adapter(h, cfg_.target_accept);
        double* sink = out_.chain_data(chain);
        long accepted = 0;
        long stored = 0;
        const long total = cfg_.burn_in + cfg_.steps;

        for (long t = 0; t < total; ++t) {
            const double noise = std::sqrt(2.0 * h);
            for (std::size_t c = 0; c < dim; ++c) y[c] = x[c] - h * gx[c] + noise * rng.normal();
            const double ey = energy_and_gradient(model_, y, gy);
            if (!std::isfinite(ey)) throw SamplerError(diagnostic(chain, t, "non-finite energy (diverged chain)"));

            double fwd = 0.0;
            double bwd = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                const double f = y[c] - x[c] + h * gx[c];
                const double b = x[c] - y[c] + h * gy[c];
                fwd += f * f;
                bwd += b * b;
            }
            const double log_ratio = ex - ey + (fwd - bwd) / (4.0 * h);
            const bool accept = std::log(rng.uniform()) < log_ratio;
            if (accept) {
                x.swap(y);
                gx.swap(gy);
                ex = ey;
            }

            if (t < cfg_.burn_in) {
                if (cfg_.adapt) {
                    const double prob = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
                    h = adapter.update(prob);
                    if (t + 1 == cfg_.burn_in) h = adapter.final_step();
                }
                continue;
            }
            if (accept) ++accepted;
            if ((t - cfg_.burn_in + 1) % cfg_.thinning == 0 && stored < out_.snapshots_per_chain()) {
                std::memcpy(sink + static_cast<std::size_t>(stored) * dim, x.data(), dim * sizeof(double));
                ++stored;
            }
        }

        const double rate = static_cast<double>(accepted) / static_cast<double>(cfg_.steps);
        out_.acceptance[static_cast<std::size_t>(chain)] = rate;
        out_.step_sizes[static_cast<std::size_t>(chain)] = h;
        if (rate < 0.05) {
            std::ostringstream msg;
            msg << "acceptance rate " << rate << " below 0.05 with step " << h
                << "; reduce step_size or enable adaptation with a longer burn_in";
            throw SamplerError(diagnostic(chain, total, msg.str()));
        }
    }

  private:
    static std::string diagnostic(int chain, long step, const std::string& what)
    {
        return "mala chain " + std::to_string(chain) + " step " + std::to_string(step) + ": " + what;
    }

    const ModelParams& model_;
    const SamplerConfig& cfg_;
    ParticleEnsemble& out_;
};

ParticleEnsemble mala_sample(const ModelParams& model, const SamplerConfig& cfg)
{
    model.validate();
    cfg.validate();
    ParticleEnsemble out(model.N, model.d, cfg.chains, cfg.steps / cfg.thinning);
    out.config_hash = cfg.hash();
    out.seed = cfg.master_seed;

    const MalaRunner runner(model, cfg, out);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.chains));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int c = next++; c < cfg.chains; c = next++) {
            try {
                runner.run_chain(c);
            } catch (...) {
                errors[static_cast<std::size_t>(c)] = std::current_exception();
            }
        }
    };

    int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, cfg.chains);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace poclab
