#include "biasaudit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace biasaudit {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace

std::string bar_chart_svg(const std::vector<std::pair<std::string, double>>& bars,
                          const BarChartOptions& opts) {
    const int top = opts.title.empty() ? 10 : 34;
    const int row = opts.bar_height + opts.bar_gap;
    const int height = top + row * static_cast<int>(bars.size()) + 10;
    const int width = opts.label_width + opts.plot_width + 20;
    const double zero_x = opts.label_width + opts.plot_width / 2.0;

    double scale = opts.scale;
    if (scale <= 0.0) {
        double max_abs = 0.0;
        for (const auto& [name, value] : bars) max_abs = std::max(max_abs, std::fabs(value));
        if (max_abs == 0.0) max_abs = 1.0;
        scale = (opts.plot_width / 2.0 - 8.0) / max_abs;
    }

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" data-scale=\"" << fmt(scale) << "\">\n";
    svg << "  <style>text{font:11px sans-serif;} .bar{fill:#4878a8;} .bar.negative{fill:#b5513f;}"
           " .zero-axis{stroke:#333;stroke-width:1;} .title{font:bold 13px sans-serif;}</style>\n";
    if (!opts.title.empty())
        svg << "  <text class=\"title\" x=\"10\" y=\"20\">" << escape_xml(opts.title)
            << "</text>\n";

    int y = top;
    for (const auto& [name, value] : bars) {
        const double w = std::fabs(value) * scale;
        const double x = value < 0.0 ? zero_x - w : zero_x;
        svg << "  <text x=\"" << opts.label_width - 6 << "\" y=\"" << y + opts.bar_height - 4
            << "\" text-anchor=\"end\">" << escape_xml(name) << "</text>\n";
        svg << "  <rect class=\"bar" << (value < 0.0 ? " negative" : "") << "\" x=\"" << fmt(x)
            << "\" y=\"" << y << "\" width=\"" << fmt(w) << "\" height=\"" << opts.bar_height
            << "\" data-value=\"" << value << "\"/>\n";
        y += row;
    }
    svg << "  <line class=\"zero-axis\" x1=\"" << fmt(zero_x) << "\" y1=\"" << top - 4
        << "\" x2=\"" << fmt(zero_x) << "\" y2=\"" << y << "\"/>\n";
    svg << "</svg>\n";
    return svg.str();
}

} // namespace biasaudit
