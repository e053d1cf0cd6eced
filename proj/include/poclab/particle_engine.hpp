#pragma once

#include "poclab/gaussian.hpp"
#include "poclab/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace poclab {

struct SamplerConfig {
    double step_size = 0.1;
    long burn_in = 10000;
    long thinning = 10;
    int chains = 1;
    long steps = 100000;
    std::uint64_t master_seed = 0;
    // Dual averaging toward `target_accept` during burn-in; frozen afterwards.
    bool adapt = true;
    double target_accept = 0.574;
    // Worker threads; 0 picks the hardware concurrency. Results never depend on it.
    int threads = 0;

    void validate() const;
    std::uint64_t hash() const;
};

// Thinned post-burn-in snapshots, chain-major: all snapshots of chain 0, then chain 1, ...
class ParticleEnsemble {
  public:
    ParticleEnsemble(int N, int d, int chains, long per_chain);

    int N() const { return N_; }
    int d() const { return d_; }
    int chains() const { return chains_; }
    long snapshots_per_chain() const { return per_chain_; }
    long size() const { return static_cast<long>(chains_) * per_chain_; }

    Eigen::Map<const Positions> snapshot(long s) const;
    // n x (k d) matrix holding particles 0..k-1 of every snapshot, flattened particle-major.
    Eigen::MatrixXd leading_particles(int k) const;
    const std::vector<double>& raw() const { return data_; }

    std::vector<double> acceptance;
    std::vector<double> step_sizes;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;

  private:
    friend class MalaRunner;
    double* chain_data(int chain);

    int N_;
    int d_;
    int chains_;
    long per_chain_;
    std::vector<double> data_;
};

// Independent Metropolis-adjusted Langevin chains targeting
// exp(-finite_particle_energy). Chain c draws from stream split(master_seed, c).
ParticleEnsemble mala_sample(const ModelParams& model, const SamplerConfig& cfg);

struct MeanFieldSolution {
    // Present for quadratic models (closed form).
    std::optional<GaussianSpec> gaussian;
    // Quadrature output for perturbed one-dimensional models.
    std::vector<double> grid;
    std::vector<double> density;
    double mean = 0.0;
    double variance = 0.0;
    int iterations = 0;
    double last_change = 0.0;
};

// Solves rho = exp(-V - W * rho) / Z. Quadratic models return N(0, I / (alpha + lambda))
// directly; perturbed 1-d models iterate the damped map on a trapezoid grid.
MeanFieldSolution mean_field_fixed_point(const ModelParams& model, double damping, double tol, int max_iter,
                                         int grid_points = 4096);

}  // namespace poclab
