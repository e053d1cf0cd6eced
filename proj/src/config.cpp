#include "poclab/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace poclab {

ConfigError::ConfigError(int line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line)
{
}

std::string_view to_string(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::Gaussian: return "gaussian";
    case ExperimentKind::GaussianScaling: return "gaussian-scaling";
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::Verify: return "verify";
    case ExperimentKind::Tails: return "tails";
    case ExperimentKind::Recursion: return "recursion";
    case ExperimentKind::Fixpoint: return "fixpoint";
    }
    return "?";
}

std::string_view to_string(SweepAxis axis)
{
    switch (axis) {
    case SweepAxis::N: return "N";
    case SweepAxis::d: return "d";
    case SweepAxis::k: return "k";
    case SweepAxis::q: return "q";
    }
    return "?";
}

ModelParams ExperimentConfig::model() const
{
    ModelParams m = ModelParams::quadratic(d, N, lambda);
    m.alpha_V0 = alpha_V0;
    if (perturbation_amplitude != 0.0) {
        m = ModelParams::perturbed(d, N, lambda,
                                   {perturbation_amplitude, perturbation_frequency, perturbation_phase});
        m.alpha_V0 = alpha_V0;
    }
    return m;
}

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& text, int line, const std::string& key)
{
    T value{};
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || text.empty())
        throw ConfigError(line, "key '" + key + "': cannot parse '" + text + "' as " +
                                    (std::is_integral_v<T> ? "an integer" : "a number"));
    return value;
}

bool parse_bool(const std::string& text, int line, const std::string& key)
{
    if (text == "true" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "no" || text == "0") return false;
    throw ConfigError(line, "key '" + key + "': expected a boolean, got '" + text + "'");
}

std::vector<std::string> tokens(const std::string& text)
{
    std::string spaced = text;
    std::replace(spaced.begin(), spaced.end(), ',', ' ');
    std::istringstream is(spaced);
    std::vector<std::string> out;
    for (std::string t; is >> t;) out.push_back(t);
    return out;
}

// "v1 v2 ..." (comma or space separated) or "geometric start stop ratio".
std::vector<double> parse_list(const std::string& text, int line, const std::string& key)
{
    const auto toks = tokens(text);
    if (toks.empty()) throw ConfigError(line, "key '" + key + "': empty list");
    if (toks[0] == "geometric") {
        if (toks.size() != 4) throw ConfigError(line, "key '" + key + "': expected 'geometric start stop ratio'");
        const double start = parse_number<double>(toks[1], line, key);
        const double stop = parse_number<double>(toks[2], line, key);
        const double ratio = parse_number<double>(toks[3], line, key);
        if (!(start > 0.0) || !(ratio > 1.0) || !(stop >= start))
            throw ConfigError(line, "key '" + key + "': geometric grid needs 0 < start <= stop and ratio > 1");
        std::vector<double> out;
        for (double v = start; v <= stop * (1.0 + 1e-12); v *= ratio) out.push_back(v);
        return out;
    }
    if (toks[0] == "linear") {
        if (toks.size() != 4) throw ConfigError(line, "key '" + key + "': expected 'linear start stop step'");
        const double start = parse_number<double>(toks[1], line, key);
        const double stop = parse_number<double>(toks[2], line, key);
        const double step = parse_number<double>(toks[3], line, key);
        if (!(step > 0.0) || !(stop >= start))
            throw ConfigError(line, "key '" + key + "': linear grid needs start <= stop and step > 0");
        std::vector<double> out;
        const long count = std::lround(std::floor((stop - start) / step + 1e-9)) + 1;
        for (long i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
        return out;
    }
    std::vector<double> out;
    for (const auto& t : toks) out.push_back(parse_number<double>(t, line, key));
    return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, int, const std::string&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto real = [](double ExperimentConfig::*field) {
            return [field](ExperimentConfig& c, const std::string& v, int line, const std::string& key) {
                c.*field = parse_number<double>(v, line, key);
            };
        };
        auto integer = [](int ExperimentConfig::*field) {
            return [field](ExperimentConfig& c, const std::string& v, int line, const std::string& key) {
                c.*field = parse_number<int>(v, line, key);
            };
        };
        t["experiment"] = [](ExperimentConfig& c, const std::string& v, int line, const std::string&) {
            static const std::map<std::string, ExperimentKind> kinds{
                {"gaussian", ExperimentKind::Gaussian},   {"gaussian-scaling", ExperimentKind::GaussianScaling},
                {"simulate", ExperimentKind::Simulate},   {"verify", ExperimentKind::Verify},
                {"tails", ExperimentKind::Tails},         {"recursion", ExperimentKind::Recursion},
                {"fixpoint", ExperimentKind::Fixpoint}};
            const auto it = kinds.find(v);
            if (it == kinds.end()) throw ConfigError(line, "key 'experiment': unknown kind '" + v + "'");
            c.kind = it->second;
        };
        t["lambda"] = real(&ExperimentConfig::lambda);
        t["N"] = integer(&ExperimentConfig::N);
        t["d"] = integer(&ExperimentConfig::d);
        t["k"] = integer(&ExperimentConfig::k);
        t["q"] = real(&ExperimentConfig::q);
        t["alpha_V0"] = real(&ExperimentConfig::alpha_V0);
        t["perturbation_amplitude"] = real(&ExperimentConfig::perturbation_amplitude);
        t["perturbation_frequency"] = real(&ExperimentConfig::perturbation_frequency);
        t["perturbation_phase"] = real(&ExperimentConfig::perturbation_phase);
        t["sweep"] = [](ExperimentConfig& c, const std::string& v, int line, const std::string&) {
            if (v == "N")
                c.sweep = SweepAxis::N;
            else if (v == "d")
                c.sweep = SweepAxis::d;
            else if (v == "k")
                c.sweep = SweepAxis::k;
            else if (v == "q")
                c.sweep = SweepAxis::q;
            else
                throw ConfigError(line, "key 'sweep': expected one of N, d, k, q; got '" + v + "'");
        };
        t["grid"] = [](ExperimentConfig& c, const std::string& v, int line, const std::string& key) {
            c.grid = parse_list(v, line, key);
        };
        t["fit_exclude_fraction"] = real(&ExperimentConfig::fit_exclude_fraction);
        t["step_size"] = [](ExperimentConfig& c, const std::string& v, int line, const std::string& key) {
            c.sampler.step_size = parse_number<double>(v, line, key);
        };
        t["burn_in"] = [](ExperimentConfig& c, const std::string& v, int line, const std::string& key) {
            c.sampler.burn_in = parse_number<long>(v, line, key);
        };
        t["thinning"] = [](ExperimentConfig& c, const std::string& v, int line, const std::string& key) {
            c.sampler.thinning = parse_number<long>(v, line, key);
        };
        t["chains"] = [](ExperimentConfig& c, const std::string& v, int line, const std::string& key) {
            c.sampler.chains = parse_number<int>(v, line, key);
        };
        t["steps"] = [](ExperimentConfig& c, const std::string& v, int line, const std::string& key) {
            c.sampler.steps = parse_number<long>(v, line, key);
        };
        t["adapt"] = [](ExperimentConfig& c, const std::string& v, int line, const std::string& key) {
            c.sampler.adapt = parse_bool(v, line, key);
        };
        t["target_accept"] = [](ExperimentConfig& c, const std::string& v, int line, const std::string& key) {
            c.sampler.target_accept = parse_number<double>(v, line, key);
        };
        t["threads"] = [](ExperimentConfig& c, const std::string& v, int line, const std::string& key) {
            c.sampler.threads = parse_number<int>(v, line, key);
        };
        t["seed"] = [](ExperimentConfig& c, const std::string& v, int line, const std::string& key) {
            c.sampler.master_seed = parse_number<std::uint64_t>(v, line, key);
        };
        t["bootstrap"] = integer(&ExperimentConfig::bootstrap);
        t["radii"] = [](ExperimentConfig& c, const std::string& v, int line, const std::string& key) {
            c.radii = parse_list(v, line, key);
        };
        t["heuristic"] = real(&ExperimentConfig::heuristic);
        t["beta_W"] = real(&ExperimentConfig::beta_W);
        t["c_lsi_bar"] = real(&ExperimentConfig::c_lsi_bar);
        t["delta_sq"] = real(&ExperimentConfig::delta_sq);
        t["xi_min"] = real(&ExperimentConfig::xi_min);
        t["damping"] = real(&ExperimentConfig::damping);
        t["tol"] = real(&ExperimentConfig::tol);
        t["max_iter"] = integer(&ExperimentConfig::max_iter);
        t["grid_points"] = integer(&ExperimentConfig::grid_points);
        t["configs"] = integer(&ExperimentConfig::configs);
        t["mc_samples"] = [](ExperimentConfig& c, const std::string& v, int line, const std::string& key) {
            c.mc_samples = parse_number<long>(v, line, key);
        };
        t["out"] = [](ExperimentConfig& c, const std::string& v, int, const std::string&) { c.out_dir = v; };
        t["name"] = [](ExperimentConfig& c, const std::string& v, int, const std::string&) { c.name = v; };
        t["format"] = [](ExperimentConfig& c, const std::string& v, int line, const std::string&) {
            if (v == "csv")
                c.format = OutputFormat::Csv;
            else if (v == "svg")
                c.format = OutputFormat::Svg;
            else if (v == "both")
                c.format = OutputFormat::Both;
            else
                throw ConfigError(line, "key 'format': expected csv, svg or both; got '" + v + "'");
        };
        return t;
    }();
    return table;
}

bool integral(double v) { return std::isfinite(v) && v == std::floor(v); }

void validate_impl(const ExperimentConfig& c, const std::map<std::string, int>& lines)
{
    auto fail = [&lines](const std::string& key, const std::string& what) {
        const auto it = lines.find(key);
        throw ConfigError(it == lines.end() ? 0 : it->second, "key '" + key + "': " + what);
    };
    const bool scaling = c.kind == ExperimentKind::GaussianScaling || c.kind == ExperimentKind::Simulate;

    if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) fail("lambda", "must be finite and >= 0");
    if (c.N < 2) fail("N", "must be >= 2");
    if (c.d < 1) fail("d", "must be >= 1");
    if (c.k < 1) fail("k", "must be >= 1");
    if (!(c.q > 1.0) || !std::isfinite(c.q)) fail("q", "must be > 1");
    if (!(c.alpha_V0 > 0.0)) fail("alpha_V0", "must be > 0");
    if (c.perturbation_amplitude != 0.0) {
        if (c.kind != ExperimentKind::Fixpoint)
            fail("perturbation_amplitude", "perturbed models are only supported by the fixpoint experiment");
        if (c.d != 1) fail("d", "perturbed fixed points are solved in d = 1 only");
    }
    if (!scaling && c.kind != ExperimentKind::Gaussian && c.kind != ExperimentKind::Fixpoint && c.k >= c.N)
        fail("k", "must be < N");
    if (c.kind == ExperimentKind::Gaussian && c.k > c.N) fail("k", "must be <= N");

    if (scaling) {
        if (c.grid.size() < 4) fail("grid", "at least 4 grid points are needed for a slope fit");
        for (std::size_t i = 1; i < c.grid.size(); ++i)
            if (!(c.grid[i] > c.grid[i - 1])) fail("grid", "must be strictly increasing");
        for (double v : c.grid) {
            switch (c.sweep) {
            case SweepAxis::N:
                if (!integral(v) || v < 2 || v < c.k) fail("grid", "N values must be integers >= max(2, k)");
                break;
            case SweepAxis::d:
                if (!integral(v) || v < 1) fail("grid", "d values must be integers >= 1");
                break;
            case SweepAxis::k:
                if (!integral(v) || v < 1 || v > c.N) fail("grid", "k values must be integers in [1, N]");
                break;
            case SweepAxis::q:
                if (!(v > 1.0)) fail("grid", "q values must be > 1");
                break;
            }
        }
        if (c.sweep != SweepAxis::N && c.k > c.N) fail("k", "must be <= N");
        if (!(c.fit_exclude_fraction >= 0.0 && c.fit_exclude_fraction < 1.0))
            fail("fit_exclude_fraction", "must be in [0, 1)");
    }
    if (c.kind == ExperimentKind::Simulate && c.sweep != SweepAxis::N) fail("sweep", "simulate sweeps over N only");

    try {
        c.sampler.validate();
    } catch (const std::invalid_argument& e) {
        std::string what = e.what();
        const auto colon = what.find(": ");
        std::string key = "sampler";
        if (colon != std::string::npos) {
            const auto rest = what.substr(colon + 2);
            key = rest.substr(0, rest.find(' '));
        }
        fail(key, what);
    }
    if (c.bootstrap < 2) fail("bootstrap", "must be >= 2");
    if (c.radii.empty()) fail("radii", "must not be empty");
    for (double r : c.radii)
        if (!(r >= 0.0) || !std::isfinite(r)) fail("radii", "radii must be finite and >= 0");
    if (!(c.heuristic >= 0.0)) fail("heuristic", "must be >= 0");
    if (!(c.beta_W > 0.0)) fail("beta_W", "must be > 0");
    if (!(c.c_lsi_bar > 0.0)) fail("c_lsi_bar", "must be > 0");
    if (!(c.delta_sq >= 0.0)) fail("delta_sq", "must be >= 0");
    if (!(c.damping > 0.0 && c.damping <= 1.0)) fail("damping", "must be in (0, 1]");
    if (!(c.tol > 0.0)) fail("tol", "must be > 0");
    if (c.max_iter < 1) fail("max_iter", "must be >= 1");
    if (c.grid_points < 3) fail("grid_points", "must be >= 3");
    if (c.configs < 1) fail("configs", "must be >= 1");
    if (c.mc_samples < 0) fail("mc_samples", "must be >= 0");
    if (c.name.find_first_of("/\\") != std::string::npos) fail("name", "must be a plain file stem");
}

}  // namespace

void ExperimentConfig::validate() const { validate_impl(*this, {}); }

ExperimentConfig default_config(ExperimentKind kind)
{
    ExperimentConfig c;
    c.kind = kind;
    switch (kind) {
    case ExperimentKind::Gaussian:
        c.N = 3;
        break;
    case ExperimentKind::GaussianScaling:
        c.grid = {64, 128, 256, 512, 1024, 2048, 4096};
        break;
    case ExperimentKind::Simulate:
        c.grid = {4, 8, 16, 32};
        c.sampler.chains = 4;
        c.sampler.steps = 20000;
        c.sampler.burn_in = 2000;
        c.sampler.thinning = 10;
        break;
    case ExperimentKind::Verify:
        c.N = 32;
        break;
    case ExperimentKind::Tails:
        c.N = 3;
        break;
    case ExperimentKind::Recursion:
        c.N = 100;
        break;
    case ExperimentKind::Fixpoint:
        break;
    }
    return c;
}

ExperimentConfig parse_config(std::string_view text, std::optional<ExperimentKind> fallback)
{
    // Defaults depend on the kind, so find it first.
    std::map<std::string, int> lines;
    std::vector<std::tuple<std::string, std::string, int>> assignments;
    int line_no = 0;
    std::istringstream is{std::string(text)};
    for (std::string raw; std::getline(is, raw);) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(line_no, "missing key");
        if (!setters().contains(key)) throw ConfigError(line_no, "unknown key '" + key + "'");
        if (const auto it = lines.find(key); it != lines.end())
            throw ConfigError(line_no, "duplicate key '" + key + "' (first set on line " + std::to_string(it->second) +
                                           ", again on line " + std::to_string(line_no) + ")");
        if (value.empty()) throw ConfigError(line_no, "key '" + key + "': missing value");
        lines[key] = line_no;
        assignments.emplace_back(key, value, line_no);
    }

    ExperimentConfig cfg;
    if (fallback) cfg.kind = *fallback;
    if (const auto it = std::find_if(assignments.begin(), assignments.end(),
                                     [](const auto& a) { return std::get<0>(a) == "experiment"; });
        it != assignments.end())
        setters().at("experiment")(cfg, std::get<1>(*it), std::get<2>(*it), "experiment");
    cfg = default_config(cfg.kind);
    for (const auto& [key, value, line] : assignments) setters().at(key)(cfg, value, line, key);
    validate_impl(cfg, lines);
    return cfg;
}

}  // namespace poclab
