#include "poclab/experiment.hpp"
#include "poclab/gaussian.hpp"
#include "poclab/slope.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace poclab;

namespace {

int error_line(std::string_view text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

std::string error_text(std::string_view text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

std::string slurp(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    std::stringstream s;
    s << is.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("config parsing")
{
    const auto c = parse_config(
        "# minimal sweep\n"
        "experiment = gaussian-scaling\n"
        "lambda = 1\nk = 1\nq = 2\nd = 1\n"
        "grid = geometric 64 4096 2   # N values\n");
    CHECK(c.kind == ExperimentKind::GaussianScaling);
    CHECK(c.grid == std::vector<double>{64, 128, 256, 512, 1024, 2048, 4096});
    CHECK(c.sampler.burn_in == 10000);
    CHECK(c.sampler.thinning == 10);

    const auto l = parse_config("experiment = gaussian-scaling\ngrid = 4, 8, 16, 32\nsweep = N\nseed = 123\n");
    CHECK(l.grid.size() == 4);
    CHECK(l.seed() == 123);
    CHECK(parse_config("experiment = gaussian-scaling\nsweep = q\ngrid = linear 1.5 3 0.5\n").grid ==
          std::vector<double>{1.5, 2.0, 2.5, 3.0});

    CHECK(error_line("lambda = 1\nbogus = 2\n") == 2);
    CHECK(error_line("lambda = one\n") == 1);
    CHECK(error_line("N = 3.5\n") == 1);
    const std::string dup = error_text("lambda = 1\nq = 2\nlambda = 2\n");
    CHECK(dup.find("lambda") != std::string::npos);
    CHECK(dup.find("line 1") != std::string::npos);
    CHECK(dup.find("line 3") != std::string::npos);
    CHECK(error_line("experiment = gaussian-scaling\ngrid = 64 32 128 256\n") == 2);
    CHECK(error_line("experiment = gaussian-scaling\ngrid = 64 128 256\n") == 2);
    CHECK(error_line("experiment = simulate\nsweep = d\ngrid = 1 2 3 4\n") == 2);
    CHECK(error_line("experiment = verify\nstep_size = -1\n") == 2);
    CHECK(error_line("experiment = verify\nthinning = 0\n") == 2);
    CHECK(error_line("no equals sign\n") == 1);
    CHECK_NOTHROW(parse_config("experiment = fixpoint\nperturbation_amplitude = 0.1\n"));
    CHECK(error_line("experiment = verify\nperturbation_amplitude = 0.1\n") == 2);
    CHECK(parse_config("lambda = 1\n", ExperimentKind::Tails).kind == ExperimentKind::Tails);
}

TEST_CASE("grid below the existence threshold is flagged, not dropped")
{
    // lambda = 2, k = 3, q = 3: threshold 1 + 12 - 2 = 11
    auto c = parse_config("experiment = gaussian-scaling\nlambda = 2\nk = 3\nq = 3\ngrid = 4 6 8 16 32 64 128 256\n");
    const auto r = run_scaling(c);
    REQUIRE(r.rows.size() == 8);
    const double nstar = renyi_existence_threshold(2, 3, 3);
    CHECK(nstar == doctest::Approx(11.0));
    bool any = false;
    for (const auto& row : r.rows) {
        if (row.divergent) {
            any = true;
            CHECK(row.N <= nstar);
            CHECK(std::isinf(row.value));
        }
        if (row.N > nstar) CHECK(!row.divergent);
    }
    CHECK(any);
    CHECK(r.fit);
}

TEST_CASE("slope fits")
{
    std::vector<std::pair<double, double>> p;
    for (double x : {1.0, 2.0, 4.0, 8.0, 16.0}) p.emplace_back(x, 1 / (x * x));
    const auto f = fit_loglog_slope(p);
    CHECK(f.slope == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(f.half_width < 1e-10);
    p.clear();
    for (double x = 64; x <= 4096; x *= 2) p.emplace_back(x, 0.125 / (x * x) + 1 / (x * x * x));
    const auto g = fit_loglog_slope(p);
    CHECK(g.slope >= -2.05);
    CHECK(g.slope <= -1.95);
    CHECK(g.half_width > 0);
    p.clear();
    for (double x : {1.0, 2.0, 3.0, 5.0}) p.emplace_back(x, 7.0);
    CHECK(fit_loglog_slope(p).slope == doctest::Approx(0.0));
    CHECK_THROWS_AS(fit_loglog_slope({{1, 1}, {2, 2}, {3, 0}, {4, INFINITY}}), std::invalid_argument);
}

TEST_CASE("exact N sweep")
{
    auto c = default_config(ExperimentKind::GaussianScaling);
    const auto r = run_scaling(c);
    REQUIRE(r.fit);
    CHECK(r.fit->slope >= -2.05);
    CHECK(r.fit->slope <= -1.95);
    CHECK(std::abs(*r.scaled_at_max / 0.125 - 1) < 0.03);
    CHECK(*r.asymptotic_reference == doctest::Approx(0.125));
    CHECK(std::abs(*r.limit_estimate / 0.125 - 1) < 0.01);
    for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i].N > r.rows[i - 1].N);

    c.lambda = 0;
    const auto z = run_scaling(c);
    for (const auto& row : z.rows) CHECK(row.value == 0.0);
    CHECK(!z.fit);

    auto dc = default_config(ExperimentKind::GaussianScaling);
    dc.sweep = SweepAxis::d;
    dc.N = 50;
    dc.grid = {1, 2, 3, 4, 5, 6, 7, 8};
    const auto dr = run_scaling(dc);
    for (const auto& row : dr.rows) CHECK(row.value == doctest::Approx(row.d * dr.rows[0].value).epsilon(1e-12));
}

TEST_CASE("scaling CSV schema and roundtrip")
{
    std::ostringstream empty;
    write_scaling_csv(empty, {});
    CHECK(empty.str() == "experiment,d,k,q,lambda,N,value,stderr,divergent\n");

    ScalingRow row;
    row.experiment = "gaussian-scaling";
    row.d = 2;
    row.k = 3;
    row.q = 2.5;
    row.lambda = 0.1;
    row.N = 77;
    row.value = 1.0 / 3.0;
    row.std_error = 0.0;
    ScalingRow inf = row;
    inf.divergent = true;
    inf.value = INFINITY;
    std::ostringstream os;
    write_scaling_csv(os, {row, inf});
    const std::string text = os.str();
    CHECK(text.find("gaussian-scaling,2,3,2.5,0.10000000000000001,77,0.33333333333333331,0,0\n") != std::string::npos);
    CHECK(text.find(",inf,0,1\n") != std::string::npos);
    std::istringstream is(text);
    const auto back = read_scaling_csv(is);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == row);
    CHECK(back[1].divergent);
    CHECK(std::isinf(back[1].value));

    const auto sweep = run_scaling(default_config(ExperimentKind::GaussianScaling));
    std::ostringstream a;
    write_scaling_csv(a, sweep.rows);
    std::istringstream b(a.str());
    CHECK(read_scaling_csv(b) == sweep.rows);

    std::istringstream bad("experiment,d\nfoo,1\n");
    CHECK_THROWS(read_scaling_csv(bad));
}

TEST_CASE("report CSV roundtrip")
{
    std::vector<VerificationReport> reps{make_report("renyi-lsi", "", 0.1, 0.3), make_report("tilt-kl", "", 2.0, 1.0)};
    std::ostringstream os;
    write_report_csv(os, reps);
    CHECK(os.str().rfind("lemma,lhs,rhs,slack,pass\n", 0) == 0);
    std::istringstream is(os.str());
    const auto back = read_report_csv(is);
    REQUIRE(back.size() == 2);
    CHECK(back[0].lemma == "renyi-lsi");
    CHECK(back[0].lhs == 0.1);
    CHECK(back[0].slack == reps[0].slack);
    CHECK(back[0].pass);
    CHECK(!back[1].pass);
}

TEST_CASE("files and plots")
{
    const auto dir = std::filesystem::temp_directory_path() / "poclab-test-files";
    std::filesystem::create_directories(dir);
    const auto r = run_scaling(default_config(ExperimentKind::GaussianScaling));
    const std::string csv = (dir / "a.csv").string();
    emit_csv(r, csv);
    const std::string first = slurp(csv);
    emit_csv(run_scaling(default_config(ExperimentKind::GaussianScaling)), csv);
    CHECK(slurp(csv) == first);
    CHECK(first.back() == '\n');
    CHECK_THROWS(emit_csv(r, (dir / "missing-dir" / "x.csv").string()));

    const std::string svg = render_plot(r);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("id=\"data\"") != std::string::npos);
    CHECK(svg.find("id=\"reference\"") != std::string::npos);
    CHECK(svg.find("id=\"fit\"") != std::string::npos);
    CHECK(render_plot(r) == svg);
    emit_plot(r, (dir / "a.svg").string());
    CHECK(slurp((dir / "a.svg").string()) == svg);

    auto c = default_config(ExperimentKind::GaussianScaling);
    c.lambda = 2;
    c.k = 3;
    c.q = 3;
    c.grid = {4, 6, 8, 16, 32, 64};
    const auto partial = run_scaling(c);
    const std::string p = render_plot(partial);
    CHECK(p.find("excluded: 4 6 8") != std::string::npos);

    ScalingResult none;
    none.rows = partial.rows;
    for (auto& row : none.rows) {
        row.divergent = true;
        row.value = INFINITY;
    }
    CHECK_THROWS_AS(render_plot(none), std::invalid_argument);
    std::filesystem::remove_all(dir);
}

TEST_CASE("subcommands")
{
    CHECK(kind_for_subcommand("verify") == ExperimentKind::Verify);
    CHECK(!kind_for_subcommand("nope"));

    const auto g = run_command("gaussian", default_config(ExperimentKind::Gaussian));
    CHECK(g.status == 0);
    std::istringstream is(g.csv);
    const auto rows = read_scaling_csv(is);
    REQUIRE(rows.size() == 7);
    CHECK(rows[0].experiment == "renyi");
    CHECK(rows[0].value == doctest::Approx(0.020411).epsilon(1e-4));
    CHECK(rows[1].value == doctest::Approx(0.008839).epsilon(1e-3));

    auto v = default_config(ExperimentKind::Verify);
    v.configs = 40;
    v.mc_samples = 1000;
    const auto out = run_command("verify", v);
    CHECK(out.status == 0);
    CHECK(run_command("verify", v).csv == out.csv);

    auto r = default_config(ExperimentKind::Recursion);
    CHECK(run_command("recursion", r).status == 0);

    auto f = default_config(ExperimentKind::Fixpoint);
    f.perturbation_amplitude = 0.1;
    f.grid_points = 512;
    const auto fp = run_command("fixpoint", f);
    CHECK(fp.status == 0);
    CHECK(fp.summary.find("variance") != std::string::npos);

    const auto t = run_command("tails", default_config(ExperimentKind::Tails));
    CHECK(t.status == 0);
    CHECK_THROWS_AS(run_command("scaling", default_config(ExperimentKind::Tails)), ConfigError);
}
