#pragma once

#include <string>
#include <vector>

#include "fogopt/core.hpp"

namespace fogopt::plot {

struct Series {
    std::string label;
    core::Vec values;  // y per slot (x = slot index + 1)
};

// Line chart on log-log axes as a standalone SVG document. Values at or below
// `floor` are drawn at the floor so the log axis stays defined.
std::string svg_loglog_chart(const std::string& title, const std::vector<Series>& series,
                             double floor = 1e-6);

void write_svg(const std::string& svg, const std::string& path);

}  // namespace fogopt::plot
