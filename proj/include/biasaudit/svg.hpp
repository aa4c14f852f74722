#pragma once

#include <string>
#include <utility>
#include <vector>

namespace biasaudit {

struct BarChartOptions {
    std::string title;
    int label_width = 190;   // left gutter for attribute names
    int plot_width = 420;    // symmetric around the zero axis
    int bar_height = 16;
    int bar_gap = 6;
    double scale = 0.0;      // px per metric unit; 0 = fit to data
};

/// Self-contained static SVG: one horizontal signed bar per (name, value)
/// pair, a vertical zero axis, no scripts. The px-per-unit scale is declared
/// as a data-scale attribute on the root element.
std::string bar_chart_svg(const std::vector<std::pair<std::string, double>>& bars,
                          const BarChartOptions& opts = {});

} // namespace biasaudit
