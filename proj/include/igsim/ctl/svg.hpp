#pragma once

#include <optional>
#include <string>
#include <vector>

namespace igsim::ctl {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<std::optional<double>> y;  // gaps break the line
};

/// Static SVG line chart.
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series, int width = 640, int height = 400);

}  // namespace igsim::ctl
