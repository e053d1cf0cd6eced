#include "poclab/errors.hpp"
#include "poclab/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

enum Exit { kOk = 0, kFail = 1, kUsage = 2, kRuntime = 3 };

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw std::runtime_error("write to " + path.string() + " failed");
}

bool compatible(poclab::ExperimentKind file, poclab::ExperimentKind sub)
{
    using K = poclab::ExperimentKind;
    const auto sweep = [](K k) { return k == K::GaussianScaling || k == K::Simulate; };
    return file == sub || (sweep(file) && sweep(sub));
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"poclab: propagation-of-chaos experiments for exchangeable Gaussian particle systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
    app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed (u64)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", format, "csv, svg or both")->check(CLI::IsMember({"csv", "svg", "both"}));

    const std::vector<std::pair<const char*, const char*>> subcommands{
        {"gaussian", "closed-form divergences of the k-marginal"},
        {"scaling", "exact N (or d, k, q) sweep with slope fit"},
        {"simulate", "MALA sweep with plug-in estimates"},
        {"verify", "check every inequality; exit 1 on any failure"},
        {"tails", "change-of-measure bounds on tail events"},
        {"recursion", "conditional-KL hierarchy coefficients"},
        {"fixpoint", "mean-field self-consistency solve"}};
    for (const auto& [name, help] : subcommands) app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    const auto kind = *poclab::kind_for_subcommand(sub);

    poclab::ExperimentConfig cfg;
    try {
        if (!config_path.empty()) {
            std::ifstream is(config_path, std::ios::binary);
            std::stringstream buf;
            buf << is.rdbuf();
            cfg = poclab::parse_config(buf.str(), kind);
            if (!compatible(cfg.kind, kind)) {
                std::cerr << "error: config experiment '" << poclab::to_string(cfg.kind) << "' does not match subcommand '"
                          << sub << "'\n";
                return kUsage;
            }
        } else {
            cfg = poclab::default_config(kind);
        }
        if (seed) cfg.sampler.master_seed = *seed;
        if (out_dir) cfg.out_dir = *out_dir;
        if (format) cfg.format = *format == "csv" ? poclab::OutputFormat::Csv
                                 : *format == "svg" ? poclab::OutputFormat::Svg
                                                    : poclab::OutputFormat::Both;
        cfg.validate();
    } catch (const poclab::ConfigError& e) {
        std::cerr << config_path;
        if (e.line() > 0) std::cerr << ":" << e.line();
        std::cerr << ": error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        const poclab::CommandOutput result = poclab::run_command(sub, cfg);
        const std::filesystem::path dir(cfg.out_dir);
        std::filesystem::create_directories(dir);
        const std::string stem = cfg.name.empty() ? sub : cfg.name;
        if (cfg.format != poclab::OutputFormat::Svg || !result.svg) write_file(dir / (stem + ".csv"), result.csv);
        if (result.svg) write_file(dir / (stem + ".svg"), *result.svg);
        std::cout << result.summary;
        return result.status == 0 ? kOk : kFail;
    } catch (const poclab::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
}
