#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>

namespace poclab {

class GaussianSpec;

// Row i holds particle i; columns are spatial coordinates.
using Positions = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Bounded smooth perturbation A*cos(w*<x, 1>/sqrt(d) + phase) added to the
// confinement. Its oscillation is 2|A| and its Hessian norm is at most |A| w^2.
struct CosinePerturbation {
    double amplitude = 0.0;
    double frequency = 1.0;
    double phase = 0.0;

    double value(std::span<const double> x) const;
    // Adds the gradient into `out`.
    void accumulate_gradient(std::span<const double> x, std::span<double> out) const;
    double oscillation() const;
    double hessian_bound() const;
};

// Confinement V = alpha_V0/2 |x|^2 + V1 and interaction W = lambda/2 |x|^2.
// alpha_W0, beta_W and the oscillations are the constants entering the LSI
// bounds; for the quadratic family they are lambda, lambda and 0.
struct ModelParams {
    int d = 1;
    int N = 2;
    double lambda = 0.0;
    double alpha_V0 = 1.0;
    double alpha_W0 = 0.0;
    double beta_W = 0.0;
    double osc_V1 = 0.0;
    double osc_W1 = 0.0;
    std::optional<CosinePerturbation> perturbation;

    static ModelParams quadratic(int d, int N, double lambda);
    static ModelParams perturbed(int d, int N, double lambda, CosinePerturbation p);

    // Throws std::invalid_argument on any violated invariant.
    void validate() const;
    bool is_quadratic() const;

    double confinement(std::span<const double> x) const;
    void accumulate_confinement_gradient(std::span<const double> x, std::span<double> out) const;
    double interaction(std::span<const double> z) const;
    void accumulate_interaction_gradient(std::span<const double> z, double scale, std::span<double> out) const;
};

class ParticleConfiguration {
  public:
    // Validates shape (N x d) and finiteness.
    ParticleConfiguration(const ModelParams& model, Positions positions);

    const ModelParams& model() const { return model_.get(); }
    const Positions& positions() const { return positions_; }
    std::span<const double> particle(int i) const;

  private:
    std::reference_wrapper<const ModelParams> model_;
    Positions positions_;
};

// -grad V(x^i) - 1/(N-1) sum_{j != i} grad W(x^i - x^j), with 0-based i.
Eigen::VectorXd pairwise_drift(const ParticleConfiguration& config, int i);

// sum_i V(x^i) + 1/(2(N-1)) sum_{i != j} W(x^i - x^j).
double finite_particle_energy(const ParticleConfiguration& config);
double confinement_energy(const ParticleConfiguration& config);
double interaction_energy(const ParticleConfiguration& config);

// Energy and full gradient in O(N d) using the quadratic form of W; `x` and
// `grad` are row-major N x d. Used by the sampler's inner loop.
double energy_and_gradient(const ModelParams& model, std::span<const double> x, std::span<double> grad);

// Natural-parameter gap between a Gaussian candidate and its image under the
// self-consistency map exp(-V - W * candidate). Quadratic models only.
double mean_field_residual(const GaussianSpec& candidate, const ModelParams& model);

}  // namespace poclab
