#pragma once

#include <string>
#include <vector>

#include "groupnav/trajectory.hpp"

namespace groupnav::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// standalone SVG line chart; series are drawn in palette order
std::string line_chart(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label);

// top-down view: robot path, pedestrian paths, periodic group hull snapshots
std::string trajectory_plot(const std::vector<io::TrajectoryRecord>& records,
                            const std::string& title);

}  // namespace groupnav::svg
