#pragma once

#include <string>
#include <vector>

namespace fleetrel {

struct SvgSeries
{
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Self-contained SVG line chart with axes, tick labels and a legend.
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<SvgSeries>& series);

} // namespace fleetrel
