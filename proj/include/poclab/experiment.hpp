#pragma once

#include "poclab/particle_engine.hpp"
#include "poclab/report.hpp"
#include "poclab/slope.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace poclab {

enum class ExperimentKind { Gaussian, GaussianScaling, Simulate, Verify, Tails, Recursion, Fixpoint };
enum class SweepAxis { N, d, k, q };
enum class OutputFormat { Csv, Svg, Both };

std::string_view to_string(ExperimentKind kind);
std::string_view to_string(SweepAxis axis);

// Configuration problem; `line` is 1-based, 0 when not tied to one line.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(int line, const std::string& what);
    int line() const { return line_; }

  private:
    int line_;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::GaussianScaling;

    // model
    double lambda = 1.0;
    int N = 64;
    int d = 1;
    int k = 1;
    double q = 2.0;
    double alpha_V0 = 1.0;
    double perturbation_amplitude = 0.0;
    double perturbation_frequency = 1.0;
    double perturbation_phase = 0.0;

    // sweep
    SweepAxis sweep = SweepAxis::N;
    std::vector<double> grid;
    double fit_exclude_fraction = 0.25;

    // sampling and estimation
    SamplerConfig sampler;
    int bootstrap = 200;

    // tails
    std::vector<double> radii{0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
    double heuristic = 1.0;

    // recursion
    double beta_W = 1.0;
    double c_lsi_bar = 0.5;
    double delta_sq = 1.0;
    double xi_min = 2.0;

    // fixpoint
    double damping = 0.5;
    double tol = 1e-10;
    int max_iter = 10000;
    int grid_points = 4096;

    // verify
    int configs = 200;
    long mc_samples = 100000;

    // output
    std::string out_dir = ".";
    std::string name;
    OutputFormat format = OutputFormat::Csv;

    std::uint64_t seed() const { return sampler.master_seed; }
    ModelParams model() const;
    // Throws ConfigError for any violated constraint.
    void validate() const;
};

// Line-oriented `key = value` document with `#` comments. `fallback` is the
// kind used when the document has no `experiment` key.
ExperimentConfig parse_config(std::string_view text, std::optional<ExperimentKind> fallback = std::nullopt);
ExperimentConfig default_config(ExperimentKind kind);

struct ScalingRow {
    std::string experiment;
    int d = 1;
    int k = 1;
    double q = 2.0;
    double lambda = 0.0;
    int N = 2;
    double value = 0.0;
    double std_error = 0.0;
    bool divergent = false;

    bool operator==(const ScalingRow&) const = default;
};

struct ScalingResult {
    SweepAxis axis = SweepAxis::N;
    std::vector<ScalingRow> rows;
    std::optional<SlopeFit> fit;
    // Richardson estimate of lim N^2 value from the two largest finite N.
    std::optional<double> limit_estimate;
    // N^2 value at the largest finite N.
    std::optional<double> scaled_at_max;
    // Closed-form asymptotic coefficient when the sweep is over N.
    std::optional<double> asymptotic_reference;
};

// Exact (gaussian-scaling) or MALA + plug-in (simulate) sweep of
// R_q(mu^[k] || pi^(x)k) over the configured grid.
ScalingResult run_scaling(const ExperimentConfig& cfg);

// Value on the sweep axis.
double axis_value(const ScalingRow& row, SweepAxis axis);

// CSV: `experiment,d,k,q,lambda,N,value,stderr,divergent` and `lemma,lhs,rhs,slack,pass`.
void write_scaling_csv(std::ostream& os, const std::vector<ScalingRow>& rows);
std::vector<ScalingRow> read_scaling_csv(std::istream& is);
void write_report_csv(std::ostream& os, const std::vector<VerificationReport>& reports);
std::vector<VerificationReport> read_report_csv(std::istream& is);

void emit_csv(const ScalingResult& result, const std::string& path);
void emit_csv(const std::vector<VerificationReport>& reports, const std::string& path);

// Standalone SVG log-log plot; throws std::invalid_argument with < 2 finite rows.
std::string render_plot(const ScalingResult& result);
void emit_plot(const ScalingResult& result, const std::string& path);

// Everything one subcommand produces, in memory.
struct CommandOutput {
    std::string csv;
    std::optional<std::string> svg;
    std::string summary;
    // 0 success, 1 verification failure.
    int status = 0;
};

// Runs a CLI subcommand (gaussian, simulate, scaling, verify, tails,
// recursion, fixpoint) against a validated config.
CommandOutput run_command(std::string_view subcommand, const ExperimentConfig& cfg);

// Kind implied by a subcommand name; nullopt for unknown names.
std::optional<ExperimentKind> kind_for_subcommand(std::string_view subcommand);

}  // namespace poclab
