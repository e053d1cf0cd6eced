#include "poclab/experiment.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace poclab {

namespace {

constexpr const char* kScalingHeader = "experiment,d,k,q,lambda,N,value,stderr,divergent";
constexpr const char* kReportHeader = "lemma,lhs,rhs,slack,pass";

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double to_double(const std::string& s, int line)
{
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw std::invalid_argument("csv line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

int to_int(const std::string& s, int line)
{
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::invalid_argument("csv line " + std::to_string(line) + ": bad integer '" + s + "'");
    return v;
}

bool to_flag(const std::string& s, int line)
{
    if (s == "1") return true;
    if (s == "0") return false;
    throw std::invalid_argument("csv line " + std::to_string(line) + ": bad flag '" + s + "'");
}

std::vector<std::vector<std::string>> read_table(std::istream& is, const char* header, std::size_t columns)
{
    std::string line;
    if (!std::getline(is, line) || line != header)
        throw std::invalid_argument(std::string("csv: expected header '") + header + "'");
    std::vector<std::vector<std::string>> out;
    int n = 1;
    while (std::getline(is, line)) {
        ++n;
        if (line.empty()) continue;
        auto fields = split(line);
        if (fields.size() != columns)
            throw std::invalid_argument("csv line " + std::to_string(n) + ": expected " + std::to_string(columns) +
                                        " fields");
        out.push_back(std::move(fields));
    }
    return out;
}

void write_file(const std::string& path, const std::string& content)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os << content;
    os.flush();
    if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

void write_scaling_csv(std::ostream& os, const std::vector<ScalingRow>& rows)
{
    os << kScalingHeader << '\n';
    for (const auto& r : rows) {
        os << r.experiment << ',' << r.d << ',' << r.k << ',' << num(r.q) << ',' << num(r.lambda) << ',' << r.N << ','
           << num(r.value) << ',' << num(r.std_error) << ',' << (r.divergent ? 1 : 0) << '\n';
    }
}

std::vector<ScalingRow> read_scaling_csv(std::istream& is)
{
    std::vector<ScalingRow> rows;
    int line = 1;
    for (const auto& f : read_table(is, kScalingHeader, 9)) {
        ++line;
        ScalingRow r;
        r.experiment = f[0];
        r.d = to_int(f[1], line);
        r.k = to_int(f[2], line);
        r.q = to_double(f[3], line);
        r.lambda = to_double(f[4], line);
        r.N = to_int(f[5], line);
        r.value = to_double(f[6], line);
        r.std_error = to_double(f[7], line);
        r.divergent = to_flag(f[8], line);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_report_csv(std::ostream& os, const std::vector<VerificationReport>& reports)
{
    os << kReportHeader << '\n';
    for (const auto& r : reports)
        os << r.lemma << ',' << num(r.lhs) << ',' << num(r.rhs) << ',' << num(r.slack) << ',' << (r.pass ? 1 : 0)
           << '\n';
}

std::vector<VerificationReport> read_report_csv(std::istream& is)
{
    std::vector<VerificationReport> out;
    int line = 1;
    for (const auto& f : read_table(is, kReportHeader, 5)) {
        ++line;
        VerificationReport r;
        r.lemma = f[0];
        r.lhs = to_double(f[1], line);
        r.rhs = to_double(f[2], line);
        r.slack = to_double(f[3], line);
        r.pass = to_flag(f[4], line);
        out.push_back(std::move(r));
    }
    return out;
}

void emit_csv(const ScalingResult& result, const std::string& path)
{
    std::ostringstream os;
    write_scaling_csv(os, result.rows);
    write_file(path, os.str());
}

void emit_csv(const std::vector<VerificationReport>& reports, const std::string& path)
{
    std::ostringstream os;
    write_report_csv(os, reports);
    write_file(path, os.str());
}

void emit_plot(const ScalingResult& result, const std::string& path) { write_file(path, render_plot(result)); }

}  // namespace poclab
