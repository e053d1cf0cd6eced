#include "poclab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace poclab {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 200.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 60.0;

std::string fmt(const char* pattern, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, a);
    return buf;
}

struct Frame {
    double x0, x1, y0, y1;  // log10 bounds

    double px(double x) const { return kLeft + (std::log10(x) - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (std::log10(y) - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

std::string point(const Frame& f, double x, double y) { return fmt("%.2f", f.px(x)) + "," + fmt("%.2f", f.py(y)); }

}  // namespace

std::string render_plot(const ScalingResult& result)
{
    std::vector<std::pair<double, double>> data;
    std::vector<double> excluded;
    for (const auto& r : result.rows) {
        const double x = axis_value(r, result.axis);
        if (r.divergent || !(r.value > 0.0) || !std::isfinite(r.value))
            excluded.push_back(x);
        else
            data.emplace_back(x, r.value);
    }
    if (data.size() < 2) throw std::invalid_argument("emit_plot: fewer than 2 finite positive rows");

    const bool reference = result.axis == SweepAxis::N && result.asymptotic_reference && *result.asymptotic_reference > 0.0;
    double xmin = data.front().first, xmax = data.front().first;
    double ymin = data.front().second, ymax = data.front().second;
    for (const auto& [x, y] : data) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    if (reference) {
        const double c = *result.asymptotic_reference;
        ymin = std::min(ymin, c / (xmax * xmax));
        ymax = std::max(ymax, c / (xmin * xmin));
    }
    Frame f{std::floor(std::log10(xmin)), std::ceil(std::log10(xmax)), std::floor(std::log10(ymin)),
            std::ceil(std::log10(ymax))};
    if (f.x1 <= f.x0) f.x1 = f.x0 + 1.0;
    if (f.y1 <= f.y0) f.y1 = f.y0 + 1.0;

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"440\" viewBox=\"0 0 640 440\">\n";
    s += "<rect width=\"640\" height=\"440\" fill=\"white\"/>\n";
    s += "<g font-family=\"sans-serif\" font-size=\"11\">\n";

    // axes and decade ticks
    const double plot_right = kWidth - kRight;
    const double plot_bottom = kHeight - kBottom;
    s += "<rect x=\"" + fmt("%.2f", kLeft) + "\" y=\"" + fmt("%.2f", kTop) + "\" width=\"" +
         fmt("%.2f", plot_right - kLeft) + "\" height=\"" + fmt("%.2f", plot_bottom - kTop) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double e = f.x0; e <= f.x1 + 1e-9; e += 1.0) {
        const double x = f.px(std::pow(10.0, e));
        s += "<line x1=\"" + fmt("%.2f", x) + "\" y1=\"" + fmt("%.2f", plot_bottom) + "\" x2=\"" + fmt("%.2f", x) +
             "\" y2=\"" + fmt("%.2f", plot_bottom + 5) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + fmt("%.2f", x) + "\" y=\"" + fmt("%.2f", plot_bottom + 18) +
             "\" text-anchor=\"middle\">1e" + fmt("%.0f", e) + "</text>\n";
    }
    for (double e = f.y0; e <= f.y1 + 1e-9; e += 1.0) {
        const double y = f.py(std::pow(10.0, e));
        s += "<line x1=\"" + fmt("%.2f", kLeft - 5) + "\" y1=\"" + fmt("%.2f", y) + "\" x2=\"" + fmt("%.2f", kLeft) +
             "\" y2=\"" + fmt("%.2f", y) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + fmt("%.2f", kLeft - 8) + "\" y=\"" + fmt("%.2f", y + 4) + "\" text-anchor=\"end\">1e" +
             fmt("%.0f", e) + "</text>\n";
    }
    s += "<text x=\"" + fmt("%.2f", (kLeft + plot_right) / 2) + "\" y=\"" + fmt("%.2f", kHeight - 20) +
         "\" text-anchor=\"middle\">" + std::string(to_string(result.axis)) + "</text>\n";
    s += "<text x=\"20\" y=\"" + fmt("%.2f", (kTop + plot_bottom) / 2) + "\" transform=\"rotate(-90 20 " +
         fmt("%.2f", (kTop + plot_bottom) / 2) + ")\" text-anchor=\"middle\">value</text>\n";

    // data
    s += "<polyline id=\"data\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (i) s += ' ';
        s += point(f, data[i].first, data[i].second);
    }
    s += "\"/>\n";
    for (const auto& [x, y] : data)
        s += "<circle cx=\"" + fmt("%.2f", f.px(x)) + "\" cy=\"" + fmt("%.2f", f.py(y)) + "\" r=\"3\" fill=\"#1f77b4\"/>\n";

    if (result.fit) {
        const auto line_y = [&](double x) { return std::exp(result.fit->intercept) * std::pow(x, result.fit->slope); };
        s += "<polyline id=\"fit\" fill=\"none\" stroke=\"#d62728\" stroke-dasharray=\"6 4\" points=\"" +
             point(f, xmin, line_y(xmin)) + " " + point(f, xmax, line_y(xmax)) + "\"/>\n";
    }
    if (reference) {
        const double c = *result.asymptotic_reference;
        s += "<polyline id=\"reference\" fill=\"none\" stroke=\"#2ca02c\" stroke-dasharray=\"2 3\" points=\"";
        const int samples = 32;
        for (int i = 0; i <= samples; ++i) {
            const double x = std::pow(10.0, std::log10(xmin) + (std::log10(xmax) - std::log10(xmin)) * i / samples);
            if (i) s += ' ';
            s += point(f, x, c / (x * x));
        }
        s += "\"/>\n";
    }

    // legend
    double ly = kTop + 10;
    const double lx = plot_right + 15;
    auto legend = [&](const std::string& text, const char* color) {
        if (color)
            s += "<line x1=\"" + fmt("%.2f", lx) + "\" y1=\"" + fmt("%.2f", ly - 4) + "\" x2=\"" + fmt("%.2f", lx + 20) +
                 "\" y2=\"" + fmt("%.2f", ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        s += "<text x=\"" + fmt("%.2f", lx + (color ? 26 : 0)) + "\" y=\"" + fmt("%.2f", ly) + "\">" + text + "</text>\n";
        ly += 16;
    };
    legend("data", "#1f77b4");
    if (result.fit)
        legend("fit slope " + fmt("%.4f", result.fit->slope) + " +/- " + fmt("%.4f", result.fit->half_width), "#d62728");
    if (reference) legend(fmt("%.6g", *result.asymptotic_reference) + " / N^2", "#2ca02c");
    if (!excluded.empty()) {
        std::string note = "excluded:";
        for (double x : excluded) note += " " + fmt("%.6g", x);
        legend(note, nullptr);
    }
    s += "</g>\n</svg>\n";
    return s;
}

}  // namespace poclab
